//! REQUEST/RESPONSE messages and their little-endian wire encoding.
//!
//! ```text
//! REQUEST  (13 bytes): kind:u8 | sender:u32 | pos.x:f32 | pos.y:f32
//! RESPONSE (26 bytes): REQUEST header | state:u8 | vel.x:f32 | vel.y:f32 | arrival:f32
//! ```
//!
//! `arrival` is an absolute timestamp on the shared simulation clock; a
//! covered sender puts its detection time there. `Never` is `+inf`.

use thiserror::Error;

use crate::geom::{Arrival, NodeId, Vec2};
use crate::protocol::NodeState;

pub const REQUEST_LEN: usize = 13;
pub const RESPONSE_LEN: usize = 26;

const KIND_REQUEST: u8 = 0;
const KIND_RESPONSE: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Message {
    Request { sender: NodeId, sender_pos: Vec2 },
    Response { sender: NodeId, sender_pos: Vec2, state: NodeState, velocity: Vec2, predicted_arrival: Arrival },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WireError {
    #[error("frame of {0} bytes matches no message layout")]
    Length(usize),
    #[error("unknown message kind {0}")]
    Kind(u8),
    #[error("unknown node state {0}")]
    State(u8),
    #[error("field `{0}` is not a valid number")]
    Field(&'static str),
}

impl Message {
    pub fn sender(&self) -> NodeId {
        match self {
            Message::Request { sender, .. } | Message::Response { sender, .. } => *sender,
        }
    }

    pub fn sender_pos(&self) -> Vec2 {
        match self {
            Message::Request { sender_pos, .. } | Message::Response { sender_pos, .. } => *sender_pos,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Message::Request { .. } => "Request",
            Message::Response { .. } => "Response",
        }
    }

    pub fn wire_len(&self) -> usize {
        match self {
            Message::Request { .. } => REQUEST_LEN,
            Message::Response { .. } => RESPONSE_LEN,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.wire_len());
        let kind = match self {
            Message::Request { .. } => KIND_REQUEST,
            Message::Response { .. } => KIND_RESPONSE,
        };
        buf.push(kind);
        buf.extend_from_slice(&self.sender().0.to_le_bytes());
        put_vec(&mut buf, self.sender_pos());
        if let Message::Response { state, velocity, predicted_arrival, .. } = self {
            buf.push(state.code());
            put_vec(&mut buf, *velocity);
            buf.extend_from_slice(&(predicted_arrival.as_secs() as f32).to_le_bytes());
        }
        buf
    }

    pub fn decode(frame: &[u8]) -> Result<Message, WireError> {
        if frame.len() != REQUEST_LEN && frame.len() != RESPONSE_LEN {
            return Err(WireError::Length(frame.len()));
        }
        let kind = frame[0];
        let expected = match kind {
            KIND_REQUEST => REQUEST_LEN,
            KIND_RESPONSE => RESPONSE_LEN,
            other => return Err(WireError::Kind(other)),
        };
        if frame.len() != expected {
            return Err(WireError::Length(frame.len()));
        }
        let sender = NodeId(u32::from_le_bytes(frame[1..5].try_into().unwrap()));
        let sender_pos = get_vec(&frame[5..13], "sender_pos")?;
        if kind == KIND_REQUEST {
            return Ok(Message::Request { sender, sender_pos });
        }
        let state = NodeState::from_code(frame[13]).ok_or(WireError::State(frame[13]))?;
        let velocity = get_vec(&frame[14..22], "velocity")?;
        let arrival = get_f32(&frame[22..26]) as f64;
        let predicted_arrival = Arrival::from_secs(arrival).map_err(|_| WireError::Field("predicted_arrival"))?;
        Ok(Message::Response { sender, sender_pos, state, velocity, predicted_arrival })
    }
}

fn put_vec(buf: &mut Vec<u8>, v: Vec2) {
    buf.extend_from_slice(&(v.x as f32).to_le_bytes());
    buf.extend_from_slice(&(v.y as f32).to_le_bytes());
}

fn get_f32(bytes: &[u8]) -> f32 {
    f32::from_le_bytes(bytes.try_into().unwrap())
}

fn get_vec(bytes: &[u8], field: &'static str) -> Result<Vec2, WireError> {
    let v = Vec2::new(get_f32(&bytes[0..4]) as f64, get_f32(&bytes[4..8]) as f64);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(WireError::Field(field))
    }
}
