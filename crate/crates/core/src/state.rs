//! Values, locations, channels, environments and system states.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("receive from empty channel {0}")]
    EmptyChannel(ChanId),
    #[error("send to full channel {0}")]
    FullChannel(ChanId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasicType {
    Bit,
    Bool,
    Byte,
    Int,
    Mtype,
}

impl BasicType {
    pub fn coerce(self, v: i64) -> Value {
        match self {
            BasicType::Bit => Value::Bit((v & 1) as u8),
            BasicType::Bool => Value::Bool(v & 1 == 1),
            BasicType::Byte => Value::Byte(v as u8),
            BasicType::Int => Value::Int(v as i32),
            BasicType::Mtype => Value::Mtype(v as u8),
        }
    }

    pub fn default_value(self) -> Value {
        self.coerce(0)
    }

    /// Full value domain, `None` for types too wide to enumerate.
    pub fn domain(self) -> Option<Vec<i64>> {
        match self {
            BasicType::Bit | BasicType::Bool => Some(vec![0, 1]),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            BasicType::Bit => "bit",
            BasicType::Bool => "bool",
            BasicType::Byte => "byte",
            BasicType::Int => "int",
            BasicType::Mtype => "mtype",
        }
    }
}

impl fmt::Display for BasicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum VarType {
    Scalar(BasicType),
    Array(BasicType, usize),
}

impl VarType {
    pub fn elem(self) -> BasicType {
        match self {
            VarType::Scalar(t) | VarType::Array(t, _) => t,
        }
    }

    pub fn default_value(self) -> Value {
        match self {
            VarType::Scalar(t) => t.default_value(),
            VarType::Array(t, n) => Value::Array(t, vec![t.default_value(); n]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bit(u8),
    Bool(bool),
    Byte(u8),
    Int(i32),
    Mtype(u8),
    Array(BasicType, Vec<Value>),
    ChanRef(ChanId),
    Undefined,
}

impl Value {
    /// Scalar integer view; `None` for arrays and undefined values.
    pub fn as_int(&self) -> Option<i64> {
        match *self {
            Value::Bit(b) | Value::Byte(b) | Value::Mtype(b) => Some(b as i64),
            Value::Bool(b) => Some(b as i64),
            Value::Int(i) => Some(i as i64),
            Value::ChanRef(c) => Some(c.0 as i64),
            Value::Array(..) | Value::Undefined => None,
        }
    }

    pub fn is_undefined(&self) -> bool {
        matches!(self, Value::Undefined)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Array(_, items) => {
                f.write_str("{")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
            Value::ChanRef(c) => write!(f, "{c}"),
            Value::Undefined => f.write_str("undef"),
            v => write!(f, "{}", v.as_int().unwrap_or_default()),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Array(_, items) => {
                let mut seq = s.serialize_seq(Some(items.len()))?;
                for v in items {
                    seq.serialize_element(v)?;
                }
                seq.end()
            }
            Value::Undefined => s.serialize_none(),
            v => s.serialize_i64(v.as_int().unwrap_or_default()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChanId(pub u32);

impl fmt::Display for ChanId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Memory locations. `Formal` slots are placeholders inside process
/// interpretations and are renamed to `Local` when a process is spawned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Loc {
    Global(u32),
    Local { pid: u32, slot: u32 },
    Formal(u32),
}

pub const NR_PR: Loc = Loc::Global(0);
pub const HANDSHAKE: Loc = Loc::Global(1);
pub const FIRST_USER_GLOBAL: u32 = 2;
pub const PID_SLOT: u32 = 0;

impl Loc {
    pub fn rename(self, pid: u32) -> Loc {
        match self {
            Loc::Formal(slot) => Loc::Local { pid, slot },
            l => l,
        }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Loc::Global(i) => write!(f, "g{i}"),
            Loc::Local { pid, slot } => write!(f, "p{pid}.{slot}"),
            Loc::Formal(i) => write!(f, "f{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelInstance {
    pub capacity: usize,
    pub fields: Vec<BasicType>,
    pub queue: VecDeque<Vec<Value>>,
}

impl ChannelInstance {
    pub fn new(capacity: usize, fields: Vec<BasicType>) -> Self {
        ChannelInstance { capacity, fields, queue: VecDeque::new() }
    }

    pub fn is_sync(&self) -> bool {
        self.capacity == 0
    }

    /// Buffer limit; a rendezvous channel holds one message in flight.
    pub fn limit(&self) -> usize {
        self.capacity.max(1)
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn nfull(&self) -> bool {
        self.queue.len() < self.limit()
    }

    pub fn head(&self) -> Option<&[Value]> {
        self.queue.front().map(Vec::as_slice)
    }

    pub fn coerce(&self, raw: &[i64]) -> Vec<Value> {
        self.fields.iter().zip(raw).map(|(t, v)| t.coerce(*v)).collect()
    }

    pub fn push(&self, id: ChanId, msg: Vec<Value>) -> Result<Self, StateError> {
        if !self.nfull() {
            return Err(StateError::FullChannel(id));
        }
        let mut next = self.clone();
        next.queue.push_back(msg);
        Ok(next)
    }

    pub fn pop(&self, id: ChanId) -> Result<(Vec<Value>, Self), StateError> {
        let mut next = self.clone();
        let msg = next.queue.pop_front().ok_or(StateError::EmptyChannel(id))?;
        Ok((msg, next))
    }
}

impl fmt::Display for ChannelInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, msg) in self.queue.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("(")?;
            for (j, v) in msg.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str(")")?;
        }
        f.write_str("]")
    }
}

/// A memory plus channel store, or the undefined state.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SystemState {
    bottom: bool,
    memory: BTreeMap<Loc, Value>,
    channels: BTreeMap<ChanId, ChannelInstance>,
}

impl SystemState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bottom() -> Self {
        SystemState { bottom: true, ..Self::default() }
    }

    pub fn is_bottom(&self) -> bool {
        self.bottom
    }

    pub fn get(&self, loc: Loc) -> Option<&Value> {
        if self.bottom {
            None
        } else {
            self.memory.get(&loc)
        }
    }

    pub fn read(&self, loc: Loc) -> Value {
        self.get(loc).cloned().unwrap_or(Value::Undefined)
    }

    pub fn update(&self, loc: Loc, v: Value) -> SystemState {
        let mut next = self.clone();
        next.write(loc, v);
        next
    }

    /// In-place write; writing an undefined value yields the undefined state.
    pub fn write(&mut self, loc: Loc, v: Value) {
        if self.bottom {
            return;
        }
        if v.is_undefined() {
            *self = SystemState::bottom();
            return;
        }
        self.memory.insert(loc, v);
    }

    pub fn channel(&self, c: ChanId) -> Option<&ChannelInstance> {
        if self.bottom {
            None
        } else {
            self.channels.get(&c)
        }
    }

    pub fn set_channel(&mut self, c: ChanId, inst: ChannelInstance) {
        if !self.bottom {
            self.channels.insert(c, inst);
        }
    }

    pub fn memory(&self) -> impl Iterator<Item = (&Loc, &Value)> {
        self.memory.iter()
    }

    pub fn channels(&self) -> impl Iterator<Item = (&ChanId, &ChannelInstance)> {
        self.channels.iter()
    }

    pub fn fresh_pid(&self) -> u32 {
        self.memory
            .keys()
            .filter_map(|l| match l {
                Loc::Local { pid, .. } => Some(pid + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn fresh_locations(&self, n: u32) -> Vec<Loc> {
        let pid = self.fresh_pid();
        (0..n).map(|slot| Loc::Local { pid, slot }).collect()
    }

    pub fn nr_pr(&self) -> Option<i64> {
        self.read(NR_PR).as_int()
    }

    /// Restriction to the given global locations, used for compact display.
    pub fn project(&self, locs: &[Loc]) -> Vec<Value> {
        locs.iter().map(|l| self.read(*l)).collect()
    }
}

impl fmt::Display for SystemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bottom {
            return f.write_str("⊥");
        }
        f.write_str("{")?;
        let mut first = true;
        for (l, v) in &self.memory {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{l}={v}")?;
        }
        for (c, inst) in &self.channels {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{c}={inst}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for SystemState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.bottom {
            return s.serialize_none();
        }
        let mut map = s.serialize_map(None)?;
        for (l, v) in &self.memory {
            map.serialize_entry(&l.to_string(), v)?;
        }
        for (c, inst) in &self.channels {
            let msgs: Vec<_> = inst.queue.iter().collect();
            map.serialize_entry(&c.to_string(), &msgs)?;
        }
        map.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Var { loc: Loc, ty: VarType, writable: bool },
    Chan(ChanId),
    Const(i64),
}

/// Identifier bindings, lexically layered: process scopes extend the root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    names: BTreeMap<String, Binding>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, b: Binding) {
        self.names.insert(name.into(), b);
    }

    pub fn lookup(&self, name: &str) -> Result<&Binding, StateError> {
        self.names.get(name).ok_or_else(|| StateError::Unbound(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Binding)> {
        self.names.iter()
    }

    /// Instantiate formal slots for a concrete process id.
    pub fn rename(&self, pid: u32) -> Env {
        let names = self
            .names
            .iter()
            .map(|(k, b)| {
                let b = match b {
                    Binding::Var { loc, ty, writable } => {
                        Binding::Var { loc: loc.rename(pid), ty: *ty, writable: *writable }
                    }
                    other => other.clone(),
                };
                (k.clone(), b)
            })
            .collect();
        Env { names }
    }
}
