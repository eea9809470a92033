use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::NodeId;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrameKind {
    Rts,
    Cts,
    Data,
    Ack,
    NRts,
    NCts,
}

impl FrameKind {
    pub fn is_notification(self) -> bool {
        matches!(self, FrameKind::NRts | FrameKind::NCts)
    }

    pub fn label(self) -> &'static str {
        match self {
            FrameKind::Rts => "RTS",
            FrameKind::Cts => "CTS",
            FrameKind::Data => "DATA",
            FrameKind::Ack => "ACK",
            FrameKind::NRts => "N-RTS",
            FrameKind::NCts => "N-CTS",
        }
    }

    /// The frame a node answers this one with, if any.
    pub fn response(self) -> Option<FrameKind> {
        match self {
            FrameKind::Rts => Some(FrameKind::Cts),
            FrameKind::Cts => Some(FrameKind::Data),
            FrameKind::Data => Some(FrameKind::Ack),
            _ => None,
        }
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PacketId {
    pub flow: usize,
    pub seq: u64,
}

/// A DATA payload moving hop by hop along a source route.
#[derive(Debug, Clone)]
pub struct Packet {
    pub id: PacketId,
    pub gen_time: SimTime,
    pub size_bytes: u32,
    pub path: Arc<[NodeId]>,
    /// Index in `path` of the node currently holding the packet.
    pub hop: usize,
}

impl Packet {
    pub fn holder(&self) -> NodeId {
        self.path[self.hop]
    }

    pub fn next_hop(&self) -> Option<NodeId> {
        self.path.get(self.hop + 1).copied()
    }

    pub fn destination(&self) -> NodeId {
        *self.path.last().expect("non-empty path")
    }
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub kind: FrameKind,
    pub src: NodeId,
    pub dst: NodeId,
    /// Remaining handshake time after this frame ends.
    pub nav: SimTime,
    pub size_bytes: u32,
    pub packet: Option<Packet>,
}

impl Frame {
    pub fn control(kind: FrameKind, src: NodeId, dst: NodeId, nav: SimTime, size_bytes: u32) -> Self {
        Frame { kind, src, dst, nav, size_bytes, packet: None }
    }

    pub fn flow_id(&self) -> Option<usize> {
        self.packet.as_ref().map(|p| p.id.flow)
    }
}
