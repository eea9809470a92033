use serde::Serialize;

use crate::engine::NodeId;
use crate::mac::FrameKind;
use crate::time::SimTime;

use super::Network;

/// One row of the optional event trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub t_ns: u64,
    pub node: NodeId,
    pub beam: Option<usize>,
    pub event: &'static str,
    pub frame_kind: Option<&'static str>,
    pub src: Option<NodeId>,
    pub dst: Option<NodeId>,
}

impl TraceRow {
    pub fn kind(&self) -> Option<FrameKind> {
        use FrameKind::*;
        [Rts, Cts, Data, Ack, NRts, NCts].into_iter().find(|k| Some(k.label()) == self.frame_kind)
    }
}

impl Network {
    pub(crate) fn log_timer(&mut self, t: SimTime, node: NodeId, event: &'static str) {
        if let Some(tr) = &mut self.trace {
            tr.push(TraceRow { t_ns: t.as_nanos(), node, beam: None, event, frame_kind: None, src: None, dst: None });
        }
    }

    pub(crate) fn log_frame(
        &mut self,
        t: SimTime,
        node: NodeId,
        beam: usize,
        event: &'static str,
        kind: FrameKind,
        src: NodeId,
        dst: NodeId,
    ) {
        if let Some(tr) = &mut self.trace {
            tr.push(TraceRow {
                t_ns: t.as_nanos(),
                node,
                beam: Some(beam),
                event,
                frame_kind: Some(kind.label()),
                src: Some(src),
                dst: Some(dst),
            });
        }
    }
}
