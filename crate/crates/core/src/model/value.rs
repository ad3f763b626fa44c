use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;

use super::{AccountId, Amount, TokenId};
use crate::rational::{self, Rational};

/// A storage cell or call argument.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Null,
    Int(i128),
    Rat(Rational),
    Account(AccountId),
    Token(TokenId),
    Bool(bool),
    Pair(Box<Value>, Box<Value>),
    Map(BTreeMap<Value, Value>),
}

impl Value {
    pub fn amount(a: Amount) -> Self {
        Value::Int(a as i128)
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Pair(Box::new(a), Box::new(b))
    }

    /// Integers and integral rationals both count as integers.
    pub fn as_int(&self) -> Option<i128> {
        match self {
            Value::Int(n) => Some(*n),
            Value::Rat(r) if r.is_integer() => Some(r.to_integer()),
            _ => None,
        }
    }

    pub fn as_amount(&self) -> Option<Amount> {
        self.as_int().and_then(|n| n.to_u64())
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Value::Int(n) => Some(Rational::from_integer(*n)),
            Value::Rat(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_account(&self) -> Option<&AccountId> {
        match self {
            Value::Account(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_token(&self) -> Option<&TokenId> {
        match self {
            Value::Token(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_map(&self) -> Option<&BTreeMap<Value, Value>> {
        match self {
            Value::Map(m) => Some(m),
            _ => None,
        }
    }

    /// Replaces every occurrence of account `from` by `to`, including map keys.
    pub fn substitute(&self, from: &AccountId, to: &AccountId) -> Value {
        match self {
            Value::Account(a) if a == from => Value::Account(to.clone()),
            Value::Pair(a, b) => Value::pair(a.substitute(from, to), b.substitute(from, to)),
            Value::Map(m) => Value::Map(
                m.iter()
                    .map(|(k, v)| (k.substitute(from, to), v.substitute(from, to)))
                    .collect(),
            ),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Rat(r) => f.write_str(&rational::render(r)),
            Value::Account(a) => write!(f, "{a}"),
            Value::Token(t) => write!(f, "{t}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Map(m) => {
                f.write_str("{")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}: {v}")?;
                }
                f.write_str("}")
            }
        }
    }
}
