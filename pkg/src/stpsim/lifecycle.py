"""Sequential scenario orchestration with a snapshot after every step.

One orchestrator drives all participants in a fixed order, invoking the
recurring (`*_rec`) operations manually at the defined points:

    setup -> order placement (both sides) -> exchange trade reporting ->
    allocation details + contracts -> affirmation -> custodian client
    trades to clearing -> clear -> settle (DVP) -> custodian settlement ->
    broker retail settlement

Retail-only scenarios simply have empty allocation steps. Any rejection or
settlement failure aborts the run; the report records every snapshot taken
up to that point. `assert_conservation` then replays the report: every
consecutive snapshot pair must conserve total money and per-symbol share
counts exactly, and the final snapshot must equal the scenario's expected
balances, with every unlisted account flat.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .assembly import Ecosystem, build_ecosystem
from .broker import BrokerParams, OrderDraft
from .clearing import SettlementFailed
from .custodian import AffirmationRejection
from .ledger import Snapshot, total_money, total_positions
from .money import Money
from .scenarios import AllocateAction, Scenario
from .trading import AllocationDetail, Rejection


class ScenarioAborted(Exception):
    def __init__(self, step: str, cause: str):
        super().__init__(f"aborted at {step}: {cause}")
        self.step = step
        self.cause = cause


@dataclass
class StepRecord:
    name: str
    snapshot: Snapshot
    events: tuple[str, ...] = ()


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{self.name}: {status}" + (f" ({self.detail})" if self.detail else "")


@dataclass
class ScenarioReport:
    product_name: str
    scenario_id: str
    steps: list[StepRecord] = field(default_factory=list)
    aborted: tuple[str, str] | None = None
    finals: list[CheckResult] = field(default_factory=list)
    journal_lines: list[str] = field(default_factory=list)
    audit_lines: list[str] = field(default_factory=list)
    trade_lines: list[str] = field(default_factory=list)
    instruction_lines: list[str] = field(default_factory=list)
    affirmation_lines: list[str] = field(default_factory=list)
    scenario: Scenario | None = None

    @property
    def completed(self) -> bool:
        return self.aborted is None

    @property
    def all_checks_passed(self) -> bool:
        return self.completed and all(check.passed for check in self.finals)


class ScenarioRunner:
    """Drives one (product, scenario) pair; strictly single-threaded."""

    def __init__(self, ecosystem: Ecosystem, scenario: Scenario):
        self.eco = ecosystem
        self.scenario = scenario
        self.report = ScenarioReport(
            product_name=ecosystem.product.product_name,
            scenario_id=scenario.scenario_id,
            scenario=scenario,
        )
        self._order_ids: dict[int, str] = {}  # action index -> broker order id
        self._step_counter = 0
        self._next_alloc = 1

    def run(self) -> ScenarioReport:
        try:
            self._snapshot("setup")
            self._place_orders()
            self._report_trades()
            self._allocation_flow()
            self._clear_and_settle()
            self._participant_settlement()
        except ScenarioAborted as abort:
            self.report.aborted = (abort.step, abort.cause)
            self._snapshot(f"aborted_{abort.step}")
        else:
            self._final_checks()
        self.report.journal_lines = self.eco.ledger.export_journal()
        for broker in self.eco.brokers.values():
            self.report.audit_lines.extend(broker.audit_export_lines())
        for exchange in self.eco.exchanges.values():
            self.report.trade_lines.extend(exchange.trade_log_lines())
        for custodian in self.eco.custodians.values():
            self.report.affirmation_lines.extend(custodian.affirmation_export_lines())
        if self.eco.clearing is not None:
            self.report.instruction_lines.extend(self.eco.clearing.instruction_export_lines())
        return self.report

    # -- steps -----------------------------------------------------------

    def _snapshot(self, name: str, events: tuple[str, ...] = ()) -> None:
        self.report.steps.append(StepRecord(name, self.eco.ledger.snapshot(), events))

    def _bump_step(self) -> None:
        self._step_counter += 1
        for broker in self.eco.brokers.values():
            broker.mark_step(self._step_counter)

    def _place_orders(self) -> None:
        for action in self.scenario.orders:
            self._bump_step()
            step = f"order_{action.index}_{action.client}"
            broker = self.eco.brokers[self.scenario.broker_of(action.client)]
            draft = OrderDraft(
                client=action.client,
                side=action.side,
                symbol=action.symbol,
                quantity=action.quantity,
                order_type=action.order_type,
                limit_price=self.scenario.money(action.price) if action.price else None,
                price_cap=self.scenario.money(action.cap) if action.cap else None,
            )
            if self.scenario.is_institution(action.client):
                outcome = broker.place_institutional_order(draft)
            else:
                outcome = broker.place_retail_order(draft)
            if isinstance(outcome, Rejection):
                raise ScenarioAborted(step, str(outcome))
            self._order_ids[action.index] = outcome
            self._snapshot(step, (f"order_id={outcome}",))

    def _report_trades(self) -> None:
        events = []
        for exchange_id, exchange in self.eco.exchanges.items():
            count = exchange.report_trades_rec()
            events.append(f"{exchange_id}:reported={count}")
        self._snapshot("report_trades", tuple(events))

    def _allocation_flow(self) -> None:
        for action in self.scenario.allocations:
            self._run_allocation(action)

    def _run_allocation(self, action: AllocateAction) -> None:
        institution = next(
            i for i in self.scenario.institutions if i.account == action.institution)
        broker = self.eco.brokers[institution.broker]
        custodian = self.eco.custodians[institution.custodian]
        order_id = self._order_ids[action.order_index]
        step = f"allocation_{action.institution}"

        fills = broker.fills.get(order_id, [])
        prices = {trade.price for trade in fills}
        if len(prices) != 1:
            raise ScenarioAborted(step, f"block {order_id} has {len(prices)} fill prices")
        price = fills[0].price

        details = []
        for end_client, quantity in action.splits:
            details.append(AllocationDetail(
                alloc_id=f"{action.institution}-A{self._next_alloc}",
                institution=action.institution,
                end_client_account=end_client,
                block_order_id=order_id,
                symbol=fills[0].symbol,
                quantity=quantity,
                price=price,
            ))
            self._next_alloc += 1

        rejection = custodian.receive_allocation_details(details)
        if rejection is not None:
            raise ScenarioAborted(step, f"custodian {rejection}")
        outcome = broker.handle_allocation_details(details)
        if isinstance(outcome, Rejection):
            raise ScenarioAborted(step, f"broker {outcome}")
        self._snapshot(step, (f"contracts={len(outcome)}",))

        contracts = list(outcome)
        if self.scenario.contract_price_perturbation:
            delta = Money(self.scenario.contract_price_perturbation, self.scenario.currency)
            contracts[0] = dataclasses.replace(contracts[0], price=contracts[0].price + delta)
        verdict = custodian.affirm_contracts(contracts)
        if isinstance(verdict, AffirmationRejection):
            raise ScenarioAborted(f"affirmation_{action.institution}", str(verdict))
        self._snapshot(f"affirmation_{action.institution}", (verdict.affirmation_id,))

    def _clear_and_settle(self) -> None:
        events = []
        for custodian_id, custodian in self.eco.custodians.items():
            sent = custodian.send_trades_to_clearing_rec()
            events.append(f"{custodian_id}:client_trades={sent}")
        self._snapshot("client_trades_to_clearing", tuple(events))

        clearing = self.eco.clearing
        obligations = clearing.clear_rec()
        self._snapshot("clear", (f"obligations={len(obligations)}",))

        try:
            instructions = clearing.settle_rec()
        except SettlementFailed as failure:
            raise ScenarioAborted("settle", str(failure)) from None
        self._snapshot("settle", (f"instructions={len(instructions)}",))

    def _participant_settlement(self) -> None:
        events = []
        for custodian_id, custodian in self.eco.custodians.items():
            moved = custodian.settle_institutional_rec()
            events.append(f"{custodian_id}:distributions={moved}")
        self._snapshot("custodian_settle", tuple(events))

        events = []
        for broker_id, broker in self.eco.brokers.items():
            credited = broker.settle_retail_rec()
            events.append(f"{broker_id}:credits={credited}")
        self._snapshot("broker_settle", tuple(events))

    # -- end-of-scenario checks -------------------------------------------

    def _final_checks(self) -> None:
        checks = self.report.finals
        for exchange_id, exchange in self.eco.exchanges.items():
            checks.append(CheckResult(
                f"no_unreported_trades[{exchange_id}]",
                exchange.pending_report_count() == 0))
        clearing = self.eco.clearing
        checks.append(CheckResult("clearing_queue_empty", clearing.queue_size() == 0))
        checks.append(CheckResult(
            "no_unsettled_obligations", clearing.unsettled_obligations() == 0))
        for broker_id, broker in self.eco.brokers.items():
            checks.append(CheckResult(
                f"no_unaffirmed_contracts[{broker_id}]", not broker.unaffirmed_blocks()))
        for custodian_id, custodian in self.eco.custodians.items():
            checks.append(CheckResult(
                f"no_pending_details[{custodian_id}]", not custodian.pending_blocks()))
            checks.append(CheckResult(
                f"no_undistributed_blocks[{custodian_id}]",
                not custodian.undistributed_blocks()))
        if clearing.netting:
            flat = self.eco.ledger.balance(clearing.ccp_account).amount == 0
            checks.append(CheckResult("ccp_flat", flat))


def run_scenario(product, scenario: Scenario,
                 broker_params: BrokerParams | None = None) -> ScenarioReport:
    ecosystem = build_ecosystem(product, scenario, broker_params)
    return ScenarioRunner(ecosystem, scenario).run()


def assert_conservation(report: ScenarioReport) -> list[CheckResult]:
    """Pairwise conservation over the recorded snapshots, then exact
    equality of the final snapshot against the scenario's expectations."""
    checks: list[CheckResult] = []
    steps = report.steps
    for previous, current in zip(steps, steps[1:]):
        money_ok = total_money(previous.snapshot) == total_money(current.snapshot)
        checks.append(CheckResult(
            f"conserve_money[{previous.name}->{current.name}]", money_ok,
            "" if money_ok else
            f"{total_money(previous.snapshot)} -> {total_money(current.snapshot)}"))
        before, after = total_positions(previous.snapshot), total_positions(current.snapshot)
        checks.append(CheckResult(
            f"conserve_equity[{previous.name}->{current.name}]", before == after,
            "" if before == after else f"{before} -> {after}"))

    scenario = report.scenario
    if scenario is not None and steps:
        final = steps[-1].snapshot
        listed = set()
        for expectation in scenario.expected:
            listed.add(expectation.account)
            actual = final.get(expectation.account)
            if actual is None:
                checks.append(CheckResult(
                    f"final[{expectation.account}]", False, "account missing"))
                continue
            want_positions = {s: q for s, q in expectation.positions if q}
            ok = (actual.money.amount == expectation.money
                  and actual.positions == want_positions)
            checks.append(CheckResult(
                f"final[{expectation.account}]", ok,
                "" if ok else
                f"have money={actual.money.amount} positions={actual.positions}, "
                f"want money={expectation.money} positions={want_positions}"))
        for account, balances in sorted(final.items()):
            if account in listed:
                continue
            flat = balances.money.amount == 0 and not balances.positions
            if not flat:
                checks.append(CheckResult(
                    f"final[{account}]", False,
                    f"unlisted account not flat: money={balances.money.amount} "
                    f"positions={balances.positions}"))
    return checks
