use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("expected an odd prime, got {0}")]
    NotOddPrime(u64),
    #[error("{what}: modulus {p} divides {value}")]
    Divisible {
        what: &'static str,
        p: u64,
        value: i128,
    },
    #[error("moduli {0} and {1} are not coprime")]
    NonCoprimeModuli(u64, u64),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("{what} = {value} exceeds the cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: u128,
        cap: u128,
    },
    #[error("polynomial vanishes identically")]
    ZeroPolynomial,
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid sieve instance: {0}")]
    InvalidInstance(String),
    #[error("invalid quartic context: {0}")]
    InvalidContext(String),
    #[error("not a solution: f(y1) + f(y2) != f(y3) + f(y4) for {0:?}")]
    NotASolution([i64; 4]),
    #[error("trivial quadruple {0:?}: {{y1, y2}} = {{y3, y4}}")]
    TrivialQuadruple([i64; 4]),
    #[error("degenerate quadruple {0:?}: u1 = v1")]
    EqualDifferences([i64; 4]),
    #[error("quadruple {0:?} has no canonical ordering y1 > y3 >= y4 > y2 >= 0")]
    NonCanonical([i64; 4]),
    #[error("prime {p} is not in the pool {pool:?}")]
    NotInPool { p: u64, pool: Vec<u64> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
