"""Executable coordination scenarios with deterministic golden traces.

Each scenario builds a small protocol into a fresh ground network and runs
it to quiescence: a bank account (plain behaviours and reactive facets), an
event counter with interruption, and a file system whose cache entries live
exactly as long as somebody is watching.  Console output is modelled as
event-message trace entries so traces stay host-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .network import (
    Continue,
    MessageAction,
    MessageEvent,
    Network,
    NonQuiescent,
    OutputAction,
    PatchAction,
    PatchEvent,
    QUIT,
    SpawnAction,
    new_network,
)
from .patches import Patch, seq_patches
from .reactive import (
    Assert,
    Asserted,
    Message,
    On,
    Retracted,
    RisingEdge,
    When,
    forever,
    reactive_actor,
    state,
    until,
)
from .tracing import aggregate_snapshots
from .values import (
    Bind,
    Capture,
    Sym,
    WILDCARD,
    canonical_key,
    intersect,
    matches,
    observe,
    project_assertions,
    rec,
)

__all__ = ["SCENARIOS", "Scenario", "run_scenario", "traces_equivalent"]

NOVEL = "novel.txt"
NOVEL_TEXT = "It was a dark and stormy night"


@dataclass(frozen=True)
class Scenario:
    name: str
    build: Callable[[Network], None]
    max_steps: int = 500

    @property
    def golden(self) -> str:
        return f"{self.name}.jsonl"


def _account(balance):
    return rec("account", balance)


def _deposit(amount):
    return rec("deposit", amount)


def _file(name, content):
    return rec("file", name, content)


# -- bank account, plain behaviour functions -----------------------------------


def build_bank_account_plain(net: Network) -> None:
    def manager(event, balance):
        if isinstance(event, MessageEvent) and matches(_deposit(WILDCARD), event.body):
            amount = event.body.fields[0]
            new_balance = balance + amount
            update = seq_patches(
                Patch((), {_account(balance)}),
                Patch({_account(new_balance)}, ()),
            )
            return Continue(new_balance, [PatchAction(update)])
        return None

    net.spawn(
        manager,
        0,
        [PatchAction(Patch({_account(0), observe(_deposit(WILDCARD))}, ()))],
    )

    def observer(event, nothing):
        if isinstance(event, PatchEvent):
            balances = project_assertions(event.patch.added, rec("account", Capture()))
            if balances:
                outs = [OutputAction(b) for (b,) in sorted(balances)]
                return Continue(nothing, outs)
        return None

    net.spawn(
        observer,
        None,
        [PatchAction(Patch({observe(_account(WILDCARD))}, ()))],
    )

    def updater(event, nothing):
        if isinstance(event, PatchEvent) and event.patch.added:
            return Continue(
                nothing,
                [MessageAction(_deposit(100)), MessageAction(_deposit(-30)), QUIT],
            )
        return None

    net.spawn(
        updater,
        None,
        [PatchAction(Patch({observe(observe(_deposit(WILDCARD)))}, ()))],
    )


# -- bank account, reactive facets ----------------------------------------------


def build_bank_account_reactive(net: Network) -> None:
    def manager(ctx):
        yield forever(
            collect=[("balance", 0)],
            facets=[
                Assert(lambda balance: _account(balance)),
                On(
                    Message(_deposit(Bind("amount"))),
                    lambda ctx, balance, amount: balance + amount,
                ),
            ],
        )

    def observer(ctx):
        yield forever(
            facets=[
                On(
                    Asserted(_account(Bind("balance"))),
                    lambda ctx, balance: ctx.display(balance),
                )
            ]
        )

    def updater(ctx):
        yield until(Asserted(observe(_deposit(WILDCARD))))
        ctx.send(_deposit(100))
        ctx.send(_deposit(-30))

    reactive_actor(net, manager)
    reactive_actor(net, observer)
    reactive_actor(net, updater)


# -- counter ---------------------------------------------------------------------


def _counter_script(ctx):
    ctx.send(Sym("starting"))

    def on_too_many(ctx, count):
        ctx.send(Sym("too-many"))
        return count

    def on_interrupt(ctx, count):
        ctx.send(Sym("interrupted"))
        return count

    final_count = yield state(
        collect=[("count", 0)],
        facets=[
            Assert(lambda count: rec("incrs-seen-so-far", count)),
            On(Message(Sym("incr")), lambda ctx, count: count + 1),
        ],
        stop=[
            When(RisingEdge(lambda count: count >= 5), on_too_many),
            When(Message(Sym("interrupt")), on_interrupt),
        ],
    )
    ctx.display(final_count)
    ctx.send(Sym("finished"))


def _spawn_counter_driver(net: Network, messages: tuple) -> None:
    # Fires its message burst once somebody declares interest in 'incr.
    def driver(event, nothing):
        if isinstance(event, PatchEvent) and event.patch.added:
            return Continue(nothing, [*(MessageAction(m) for m in messages), QUIT])
        return None

    net.spawn(
        driver,
        None,
        [PatchAction(Patch({observe(observe(Sym("incr")))}, ()))],
    )


def build_counter(net: Network) -> None:
    reactive_actor(net, _counter_script)
    _spawn_counter_driver(net, (Sym("incr"),) * 5)


def build_counter_interrupt(net: Network) -> None:
    reactive_actor(net, _counter_script)
    _spawn_counter_driver(net, (Sym("incr"), Sym("incr"), Sym("interrupt")))


# -- file system, reactive ---------------------------------------------------------


def build_file_system_reactive(net: Network) -> None:
    def file_system(ctx):
        def on_save(ctx, files, name, content):
            return {**files, name: content}

        def on_delete(ctx, files, name):
            return {k: v for k, v in files.items() if k != name}

        def on_observed(ctx, files, name):
            # Cache entry: lives until the last observer loses interest.
            ctx.detach(
                until(
                    Retracted(observe(_file(name, WILDCARD))),
                    collect=[("content", files.get(name, False))],
                    facets=[
                        Assert(lambda content: _file(name, content)),
                        On(
                            Message(rec("save", _file(name, Bind("new")))),
                            lambda ctx, content, new: new,
                        ),
                        On(
                            Message(rec("delete", _file(name, WILDCARD))),
                            lambda ctx, content: False,
                        ),
                    ],
                )
            )
            return files

        yield forever(
            collect=[("files", {})],
            facets=[
                On(Message(rec("save", _file(Bind("name"), Bind("content")))), on_save),
                On(Message(rec("delete", _file(Bind("name"), WILDCARD))), on_delete),
                On(Asserted(observe(_file(Bind("name"), WILDCARD))), on_observed),
            ],
        )

    def monitor(ctx):
        def saw(ctx, seen, text):
            ctx.display(text)
            return seen + 1

        # Reads the missing-file marker, then the saved text, then gets bored.
        yield state(
            collect=[("seen", 0)],
            facets=[On(Asserted(_file(NOVEL, Bind("text"))), saw)],
            stop=[When(RisingEdge(lambda seen: seen >= 2))],
        )

    def writer(ctx):
        yield until(Asserted(_file(NOVEL, WILDCARD)))
        ctx.send(rec("save", _file(NOVEL, NOVEL_TEXT)))

    reactive_actor(net, file_system)
    reactive_actor(net, monitor)
    reactive_actor(net, writer)


# -- file system, plain ---------------------------------------------------------------


def _spawn_file_observation(name, content):
    """Plain-style cache entry: one actor per observed file name."""
    save_pat = rec("save", _file(name, WILDCARD))
    delete_pat = rec("delete", _file(name, WILDCARD))
    watched = observe(_file(name, WILDCARD))

    def observation(event, content):
        if isinstance(event, MessageEvent):
            if matches(save_pat, event.body):
                new = event.body.fields[0].fields[1]
                if new == content:
                    return None
                return Continue(
                    new, [PatchAction(Patch({_file(name, new)}, {_file(name, content)}))]
                )
            if matches(delete_pat, event.body):
                if content is False:
                    return None
                return Continue(
                    False,
                    [PatchAction(Patch({_file(name, False)}, {_file(name, content)}))],
                )
            return None
        if any(a == watched for a in event.patch.removed):
            return Continue(content, [QUIT])
        return None

    startup = PatchAction(
        Patch(
            {_file(name, content), observe(save_pat), observe(delete_pat), observe(watched)},
            (),
        )
    )
    return SpawnAction(observation, content, (startup,))


def build_file_system_plain(net: Network) -> None:
    observed_file = observe(_file(Capture(), WILDCARD))

    def file_system(event, files):
        if isinstance(event, MessageEvent):
            if matches(rec("save", _file(WILDCARD, WILDCARD)), event.body):
                f = event.body.fields[0]
                return Continue({**files, f.fields[0]: f.fields[1]}, [])
            if matches(rec("delete", _file(WILDCARD, WILDCARD)), event.body):
                f = event.body.fields[0]
                return Continue({k: v for k, v in files.items() if k != f.fields[0]}, [])
            return None
        names = project_assertions(event.patch.added, observed_file)
        if not names:
            return None
        spawns = [
            _spawn_file_observation(name, files.get(name, False))
            for (name,) in sorted(names)
        ]
        return Continue(files, spawns)

    net.spawn(
        file_system,
        {},
        [
            PatchAction(
                Patch(
                    {
                        observe(rec("save", _file(WILDCARD, WILDCARD))),
                        observe(rec("delete", _file(WILDCARD, WILDCARD))),
                        observe(observe(_file(WILDCARD, WILDCARD))),
                    },
                    (),
                )
            )
        ],
    )

    def monitor(event, seen):
        if isinstance(event, PatchEvent):
            texts = project_assertions(event.patch.added, _file(NOVEL, Capture()))
            if texts:
                ordered = sorted(texts, key=lambda t: canonical_key(t[0]))
                outs = [OutputAction(t) for (t,) in ordered]
                seen += len(texts)
                return Continue(seen, outs + ([QUIT] if seen >= 2 else []))
        return None

    net.spawn(monitor, 0, [PatchAction(Patch({observe(_file(NOVEL, WILDCARD))}, ()))])

    def writer(event, nothing):
        if isinstance(event, PatchEvent) and any(
            intersect(_file(NOVEL, WILDCARD), a) is not None
            for a in event.patch.added
        ):
            return Continue(
                nothing, [MessageAction(rec("save", _file(NOVEL, NOVEL_TEXT))), QUIT]
            )
        return None

    net.spawn(writer, None, [PatchAction(Patch({observe(_file(NOVEL, WILDCARD))}, ()))])


# -- registry and runner -----------------------------------------------------------------


SCENARIOS: dict[str, Scenario] = {
    s.name: s
    for s in (
        Scenario("bank-account-plain", build_bank_account_plain),
        Scenario("bank-account-reactive", build_bank_account_reactive),
        Scenario("counter", build_counter),
        Scenario("counter-interrupt", build_counter_interrupt),
        Scenario("file-system-plain", build_file_system_plain),
        Scenario("file-system-reactive", build_file_system_reactive),
    )
}


def run_scenario(
    name: str,
    max_steps: Optional[int] = None,
    *,
    oracle: bool = False,
    picker: Optional[Callable[[int], int]] = None,
) -> tuple[Network, list[str]]:
    """Build and run a scenario to quiescence; returns (network, trace lines).

    With oracle=True the incremental visibility bookkeeping is recomputed
    from scratch after every dispatch.  picker, given the queue length,
    chooses which queued event to dispatch next (tests use it to explore
    alternative interleavings; default is FIFO).
    """
    scenario = SCENARIOS[name]
    limit = max_steps if max_steps is not None else scenario.max_steps
    net = new_network()
    scenario.build(net)
    if oracle or picker is not None:
        steps = 0
        while True:
            if steps >= limit:
                if net.queue:
                    raise NonQuiescent(limit)
                break
            index = picker(len(net.queue)) if (picker and net.queue) else 0
            if not net.dispatch_one(index):
                break
            if oracle:
                net.check_visibility()
            steps += 1
    else:
        net.run_until_quiescent(limit)
    return net, net.trace.lines()


def traces_equivalent(trace_a, trace_b, lens) -> bool:
    """True when both traces walk through identical lens-restricted snapshots."""
    return aggregate_snapshots(trace_a, lens) == aggregate_snapshots(trace_b, lens)
