"""The network actor: actor table, aggregate dataspace, deterministic queue.

Actors are leaf behaviours (functions from an event and private state to a
step result) or nested networks.  All shared-state changes flow through
patches; the network turns each patch into per-actor state change
notifications by diffing every actor's visible set.  Scheduling is a single
FIFO of (actor, event) pairs, so identical programs produce identical traces.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .patches import Patch, apply_patch, clamp_patch, delta, interests_of, visible
from .tracing import TraceLog, patch_jsonable
from .values import is_ground, matches, to_jsonable

__all__ = [
    "Continue",
    "MessageAction",
    "MessageEvent",
    "Network",
    "NonQuiescent",
    "OutputAction",
    "PatchAction",
    "PatchEvent",
    "QUIT",
    "QuitAction",
    "SpawnAction",
    "VisibilityMismatch",
    "new_network",
]


class NonQuiescent(RuntimeError):
    """The event queue was still busy after the dispatch budget ran out."""

    def __init__(self, max_steps: int):
        super().__init__(f"not quiescent after {max_steps} dispatches")
        self.max_steps = max_steps


class VisibilityMismatch(RuntimeError):
    """Incremental visibility bookkeeping diverged from a from-scratch recount."""


@dataclass(frozen=True)
class PatchEvent:
    patch: Patch


@dataclass(frozen=True)
class MessageEvent:
    body: Any


@dataclass(frozen=True)
class PatchAction:
    patch: Patch


@dataclass(frozen=True)
class MessageAction:
    body: Any


@dataclass(frozen=True)
class OutputAction:
    """Modelled console output; becomes an event-message trace entry."""

    value: Any


@dataclass(frozen=True)
class SpawnAction:
    behaviour: Callable
    state: Any
    actions: tuple = ()


@dataclass(frozen=True)
class QuitAction:
    pass


QUIT = QuitAction()

# Internal scheduling event: "the nested network behind this actor has work".
_TICK = object()


def _crash_detail(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


@dataclass
class _ActorEntry:
    behaviour: Optional[Callable]
    state: Any
    asserted: frozenset = frozenset()
    last_visible: frozenset = frozenset()
    nested: Optional["Network"] = None


@dataclass
class Continue:
    """Step result: updated private state plus actions for the network."""

    state: Any
    actions: tuple | list = ()


class Network:
    """A dataspace plus the actors it contains.

    Use :func:`new_network` for the ground network; nested networks are
    created with :meth:`spawn_nested`.  Mutation happens only inside
    ``dispatch_one``/``interpret_action``; confine each network tree to one
    logical thread.
    """

    def __init__(self, *, _path=(), _trace=None, _parent=None):
        self.path: tuple[int, ...] = _path
        self.actors: dict[tuple[int, ...], _ActorEntry] = {}
        self.aggregate: Counter = Counter()
        self.queue: deque = deque()
        self.trace: TraceLog = _trace if _trace is not None else TraceLog()
        self._next_index = 0
        self._parent: Optional[Network] = _parent
        self._tick_pending = False
        self._handshake_counter = 0

    # -- identity -----------------------------------------------------------

    def _label(self, aid: tuple[int, ...]) -> str:
        return "/".join(["g", *map(str, aid)])

    def fresh_handshake_id(self) -> int:
        """Monotonic token, unique within this network's private dataspace."""
        n = self._handshake_counter
        self._handshake_counter += 1
        return n

    # -- spawning and termination -------------------------------------------

    def spawn(self, behaviour, state, startup_actions=()) -> tuple[int, ...]:
        """Register an actor and interpret its startup actions in order.

        If the state object defines ``on_spawn(actor_id, network)`` it is
        invoked after registration and may return extra startup actions;
        this lets stateful runtimes learn their own identity.
        """
        aid = (*self.path, self._next_index)
        self._next_index += 1
        self.actors[aid] = _ActorEntry(behaviour=behaviour, state=state)
        self.trace.emit(self._label(aid), "spawn", None)
        actions = list(startup_actions)
        hook = getattr(state, "on_spawn", None)
        if callable(hook):
            try:
                actions.extend(hook(aid, self))
            except Exception as exc:
                self.terminate_actor(aid, ("crash", _crash_detail(exc)))
                return aid
        self._interpret_all(aid, actions)
        return aid

    def spawn_nested(self) -> "Network":
        """Create a contained network actor with its own private dataspace."""
        aid = (*self.path, self._next_index)
        self._next_index += 1
        child = Network(_path=aid, _trace=self.trace, _parent=self)
        self.actors[aid] = _ActorEntry(behaviour=None, state=None, nested=child)
        self.trace.emit(self._label(aid), "spawn", None)
        return child

    def terminate_actor(self, aid: tuple[int, ...], reason="quit") -> None:
        """Retract everything the actor asserted, notify, and remove it.

        reason is "quit" for clean termination or ("crash", detail).
        Pending queued events addressed to the actor are discarded.
        """
        entry = self.actors.get(aid)
        if entry is None:
            return
        if entry.asserted:
            self._apply_actor_patch(aid, Patch(frozenset(), entry.asserted))
        if entry.nested is not None:
            entry.nested._finalize_subtree()
        del self.actors[aid]
        if self.queue:
            self.queue = deque((b, e) for (b, e) in self.queue if b != aid)
        if reason == "quit":
            self.trace.emit(self._label(aid), "quit", None)
        else:
            detail = reason[1] if isinstance(reason, tuple) else str(reason)
            self.trace.emit(self._label(aid), "crash", detail)

    def _finalize_subtree(self) -> None:
        # The containing network actor is going away: the private dataspace
        # vanishes wholesale, so no retraction protocol runs inside it.
        for cid, entry in self.actors.items():
            if entry.nested is not None:
                entry.nested._finalize_subtree()
            self.trace.emit(self._label(cid), "quit", None)
        self.actors.clear()
        self.aggregate.clear()
        self.queue.clear()

    # -- action interpretation ----------------------------------------------

    def _interpret_all(self, aid: tuple[int, ...], actions) -> None:
        # Failures while interpreting an actor's actions crash that actor.
        for act in actions:
            if aid not in self.actors:
                break  # quit or crashed part-way through its action list
            try:
                self.interpret_action(aid, act)
            except Exception as exc:
                self.terminate_actor(aid, ("crash", _crash_detail(exc)))
                break

    def interpret_action(self, aid: tuple[int, ...], action) -> None:
        """Perform one action on behalf of a registered actor."""
        if aid not in self.actors:
            return
        if isinstance(action, PatchAction):
            self._apply_actor_patch(aid, action.patch)
        elif isinstance(action, MessageAction):
            self._send_message(aid, action.body)
        elif isinstance(action, OutputAction):
            self.trace.emit(self._label(aid), "event-message", to_jsonable(action.value))
        elif isinstance(action, SpawnAction):
            self.spawn(action.behaviour, action.state, action.actions)
        elif isinstance(action, QuitAction):
            self.terminate_actor(aid, "quit")
        else:
            raise TypeError(f"unknown action: {action!r}")

    def _apply_actor_patch(self, aid, patch: Patch) -> None:
        entry = self.actors[aid]
        clamped = clamp_patch(patch, entry.asserted)
        if clamped.is_empty():
            return
        entry.asserted = apply_patch(entry.asserted, clamped)
        for a in clamped.added:
            self.aggregate[a] += 1
        for a in clamped.removed:
            n = self.aggregate[a] - 1
            if n:
                self.aggregate[a] = n
            else:
                del self.aggregate[a]
        self.trace.emit(self._label(aid), "patch-out", patch_jsonable(clamped))
        self._refresh_visibility()

    def _refresh_visibility(self) -> None:
        support = frozenset(self.aggregate)
        for bid, entry in self.actors.items():
            now = visible(support, interests_of(entry.asserted))
            if now != entry.last_visible:
                self._enqueue(bid, PatchEvent(delta(entry.last_visible, now)))
                entry.last_visible = now

    def _send_message(self, sender, body) -> None:
        if not is_ground(body):
            self.terminate_actor(sender, ("crash", f"non-ground message: {body!r}"))
            return
        self.trace.emit(self._label(sender), "message", to_jsonable(body))
        for bid, entry in self.actors.items():
            if any(matches(p, body) for p in interests_of(entry.asserted)):
                self._enqueue(bid, MessageEvent(body))

    # -- scheduling -----------------------------------------------------------

    def _enqueue(self, aid, event) -> None:
        self.queue.append((aid, event))
        self._notify_parent()

    def _notify_parent(self) -> None:
        if self._parent is not None and not self._tick_pending:
            self._tick_pending = True
            self._parent._enqueue(self.path, _TICK)

    def dispatch_one(self, index: int = 0) -> bool:
        """Deliver one queued event; False when quiescent.

        index selects which queued event to take (default: oldest); tests
        use it to explore alternative interleavings.
        """
        while self.queue:
            i = index if 0 < index < len(self.queue) else 0
            aid, event = self.queue[i]
            del self.queue[i]
            entry = self.actors.get(aid)
            if entry is None:
                continue  # defensive: terminate_actor already filters
            if entry.nested is not None:
                child = entry.nested
                child._tick_pending = False
                progressed = child.dispatch_one() if child.queue else False
                if child.queue:
                    child._notify_parent()
                if not progressed:
                    continue
                return True
            if isinstance(event, PatchEvent):
                self.trace.emit(self._label(aid), "patch-in", patch_jsonable(event.patch))
            try:
                result = entry.behaviour(event, entry.state)
            except Exception as exc:
                self.terminate_actor(aid, ("crash", _crash_detail(exc)))
                return True
            if result is None:
                return True
            entry.state = result.state
            self._interpret_all(aid, result.actions)
            return True
        return False

    def run_until_quiescent(self, max_steps: int) -> int:
        """Dispatch until the queue drains; NonQuiescent past max_steps."""
        if max_steps <= 0:
            raise ValueError("max_steps must be positive")
        steps = 0
        while steps < max_steps:
            if not self.dispatch_one():
                return steps
            steps += 1
        if self.queue:
            raise NonQuiescent(max_steps)
        return steps

    # -- brute-force oracle ----------------------------------------------------

    def check_visibility(self) -> None:
        """Recompute aggregate counts and visible sets from scratch and compare."""
        recount: Counter = Counter()
        for entry in self.actors.values():
            recount.update(entry.asserted)
        if recount != self.aggregate:
            raise VisibilityMismatch(
                f"aggregate drift at {self._label(self.path) if self.path else 'g'}: "
                f"{dict(self.aggregate)} != {dict(recount)}"
            )
        support = frozenset(self.aggregate)
        for bid, entry in self.actors.items():
            expect = visible(support, interests_of(entry.asserted))
            if expect != entry.last_visible:
                raise VisibilityMismatch(
                    f"visible-set drift at {self._label(bid)}: "
                    f"{set(entry.last_visible)} != {set(expect)}"
                )
            if entry.nested is not None:
                entry.nested.check_visibility()


def new_network() -> Network:
    """The ground network at the outermost layer."""
    return Network()
