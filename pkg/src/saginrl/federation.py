"""Federation center: soft trend aggregation, FedAVG, and the round protocol.

Message wire format (all integers big-endian):

    u32 round | u32 agent id | u8 payload kind | parameter bytes

Socket mode frames each message with a 4-byte big-endian length prefix.
In dfsac_soft mode the center only ever sees trend payloads; policy
parameters never leave their agents.
"""

from __future__ import annotations

import socket
import struct
import threading
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .params import ParamSet, WireFormatError, deserialize, serialize


class PayloadKind(IntEnum):
    TREND1 = 1
    TREND2 = 2
    FULL_MODEL = 3


@dataclass(frozen=True)
class RoundMessage:
    round_no: int
    agent_id: int
    kind: PayloadKind
    payload: bytes


class FederationError(RuntimeError):
    pass


class RoundTimeout(FederationError):
    pass


def encode_message(msg: RoundMessage) -> bytes:
    return struct.pack(">IIB", msg.round_no, msg.agent_id, int(msg.kind)) + msg.payload


def decode_message(data: bytes) -> RoundMessage:
    if len(data) < 9:
        raise WireFormatError("message truncated before header")
    round_no, agent_id, kind = struct.unpack(">IIB", data[:9])
    try:
        payload_kind = PayloadKind(kind)
    except ValueError as e:
        raise WireFormatError(f"unknown payload kind {kind}") from e
    return RoundMessage(round_no, agent_id, payload_kind, data[9:])


def aggregate_soft(global_ps: ParamSet, local_ps: ParamSet, eps: float) -> ParamSet:
    """Blend one agent's parameters into the global set.

    Endpoints are exact (eps=1 returns the local set, eps=0 the global
    set); interior values use global + eps*(local - global), whose
    floating-point rounding stays inside [min, max] of the inputs.
    """
    if local_ps.layout_id != global_ps.layout_id:
        raise WireFormatError("layout mismatch between local and global parameters")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must be in [0, 1]")
    if eps == 1.0:
        return local_ps
    if eps == 0.0:
        return global_ps
    e = np.float32(eps)
    return global_ps.zip_map(local_ps, lambda g, l: g + e * (l - g))


def aggregate_mean(locals_: list[ParamSet]) -> ParamSet:
    """Elementwise arithmetic mean in list order (FedAVG)."""
    if not locals_:
        raise ValueError("aggregate_mean needs at least one ParamSet")
    layout = locals_[0].layout_id
    for p in locals_[1:]:
        if p.layout_id != layout:
            raise WireFormatError("layout mismatch in FedAVG aggregation")
    n = np.float32(len(locals_))
    out = []
    for i in range(len(locals_[0].tensors)):
        acc = locals_[0].tensors[i].copy()
        for p in locals_[1:]:
            acc = acc + p.tensors[i]
        out.append(acc / n)
    return ParamSet(tuple(out))


@dataclass
class FederationConfig:
    eps: float = 1e-2
    k: int = 200
    roster: tuple[int, ...] = ()
    mode: str = "dfsac_soft"  # "dfsac_soft" | "fedavg_mean"

    def __post_init__(self) -> None:
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("eps must be in (0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.mode not in ("dfsac_soft", "fedavg_mean"):
            raise ValueError(f"unknown mode {self.mode!r}")


class FederationServer:
    """One-round-at-a-time center node with barrier semantics.

    Agents submit messages for the current round; the round runs only
    once every roster member has reported. The audit log records every
    payload kind the center ever accepted.
    """

    def __init__(self, cfg: FederationConfig,
                 init_globals: dict[PayloadKind, ParamSet] | None = None):
        self.cfg = cfg
        self.round_no = 0
        self.globals: dict[PayloadKind, ParamSet] = dict(init_globals or {})
        self.layouts = {kind: ps.layout_id for kind, ps in self.globals.items()}
        self.staged: dict[int, dict[PayloadKind, ParamSet]] = {}
        self.audit: list[tuple[int, int, PayloadKind]] = []

    def expected_kinds(self) -> tuple[PayloadKind, ...]:
        if self.cfg.mode == "dfsac_soft":
            return (PayloadKind.TREND1, PayloadKind.TREND2)
        return (PayloadKind.FULL_MODEL,)

    def submit(self, msg: RoundMessage) -> None:
        if msg.agent_id not in self.cfg.roster:
            raise FederationError(f"agent {msg.agent_id} is not on the roster")
        if msg.round_no != self.round_no:
            raise FederationError(
                f"message for round {msg.round_no}, server at {self.round_no}")
        if msg.kind not in self.expected_kinds():
            raise FederationError(
                f"payload kind {msg.kind.name} not accepted in {self.cfg.mode} mode")
        slot = self.staged.setdefault(msg.agent_id, {})
        if msg.kind in slot:
            raise FederationError(
                f"duplicate {msg.kind.name} from agent {msg.agent_id} this round")
        ps = deserialize(msg.payload)
        expected = self.layouts.get(msg.kind)
        if expected is not None and ps.layout_id != expected:
            raise WireFormatError(f"layout mismatch for {msg.kind.name}")
        slot[msg.kind] = ps
        self.audit.append((msg.round_no, msg.agent_id, msg.kind))

    def round_complete(self) -> bool:
        kinds = self.expected_kinds()
        return all(aid in self.staged and all(k in self.staged[aid] for k in kinds)
                   for aid in self.cfg.roster)

    def run_round(self, messages: list[RoundMessage] | None = None
                  ) -> dict[int, dict[PayloadKind, bytes]]:
        """Aggregate the staged round and return the distribution map."""
        for msg in messages or ():
            self.submit(msg)
        if not self.round_complete():
            missing = [a for a in self.cfg.roster if a not in self.staged]
            raise FederationError(f"round {self.round_no} incomplete, missing {missing}")
        if self.cfg.mode == "dfsac_soft":
            for kind in (PayloadKind.TREND1, PayloadKind.TREND2):
                agg = self.globals[kind]
                for aid in sorted(self.cfg.roster):
                    agg = aggregate_soft(agg, self.staged[aid][kind], self.cfg.eps)
                self.globals[kind] = agg
            out_kinds = (PayloadKind.TREND1, PayloadKind.TREND2)
        else:
            locals_ = [self.staged[aid][PayloadKind.FULL_MODEL]
                       for aid in sorted(self.cfg.roster)]
            self.globals[PayloadKind.FULL_MODEL] = aggregate_mean(locals_)
            self.layouts.setdefault(PayloadKind.FULL_MODEL,
                                    self.globals[PayloadKind.FULL_MODEL].layout_id)
            out_kinds = (PayloadKind.FULL_MODEL,)
        payloads = {k: serialize(self.globals[k]) for k in out_kinds}
        result = {aid: dict(payloads) for aid in self.cfg.roster}
        self.staged = {}
        self.round_no += 1
        return result


# ---- socket transport --------------------------------------------------------


def send_framed(sock: socket.socket, payload: bytes) -> None:
    sock.sendall(struct.pack(">I", len(payload)) + payload)


def recv_framed(sock: socket.socket) -> bytes:
    head = _recv_exact(sock, 4)
    (n,) = struct.unpack(">I", head)
    return _recv_exact(sock, n)


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise WireFormatError("connection closed mid-frame")
        buf += chunk
    return buf


def serve_one_round(server: FederationServer, host: str = "127.0.0.1", port: int = 0,
                    timeout_s: float = 10.0):
    """Run one socket round in a background thread.

    Returns (listening address, thread, error list). Each roster agent
    connects once, sends its framed messages, and receives the framed
    global payloads back on the same connection. A timeout aborts the
    round without partial aggregation.
    """
    lsock = socket.create_server((host, port))
    lsock.settimeout(timeout_s)
    addr = lsock.getsockname()
    errors: list[Exception] = []
    n_msgs = len(server.expected_kinds())

    def run() -> None:
        conns: dict[int, socket.socket] = {}
        try:
            try:
                while not server.round_complete():
                    conn, _ = lsock.accept()
                    conn.settimeout(timeout_s)
                    agent_id = None
                    for _ in range(n_msgs):
                        msg = decode_message(recv_framed(conn))
                        server.submit(msg)
                        agent_id = msg.agent_id
                    conns[agent_id] = conn
            except (socket.timeout, TimeoutError) as e:
                server.staged = {}
                raise RoundTimeout("round aborted: agents missing at timeout") from e
            round_no = server.round_no
            result = server.run_round()
            for aid, conn in conns.items():
                for kind, payload in result[aid].items():
                    reply = RoundMessage(round_no, aid, kind, payload)
                    send_framed(conn, encode_message(reply))
        except Exception as e:  # surfaced to the caller after join()
            errors.append(e)
        finally:
            for conn in conns.values():
                conn.close()
            lsock.close()

    thread = threading.Thread(target=run, daemon=True)
    thread.start()
    return addr, thread, errors


def exchange_over_socket(addr, messages: list[RoundMessage],
                         timeout_s: float = 10.0) -> list[RoundMessage]:
    """Agent side of one socket round: send messages, receive the globals."""
    with socket.create_connection(addr, timeout=timeout_s) as sock:
        for msg in messages:
            send_framed(sock, encode_message(msg))
        return [decode_message(recv_framed(sock)) for _ in messages]
