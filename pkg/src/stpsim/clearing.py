"""Clearing and settlement: obligations, netting, and atomic DVP.

The clearing corporation queues trade reports from exchanges and
client-level records from custodians. A street trade whose side was placed
for an institutional client stays pending until custodian records cover
that order's full executed quantity (affirmation has transferred
settlement responsibility), then clears under the product's bound rule:

* trade_for_trade: one money obligation and one equity obligation per
  trade, settled bilaterally between the two settlement accounts.
* multilateral_netting: per (account, symbol) signed sums, settled against
  the central counterparty account, which must end every cycle flat.

Money legs execute through the clearing bank and equity legs through the
depository; the two legs of an instruction commit atomically or not at all.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ledger import Ledger
from .money import Money
from .registry import NotFound, ParticipantId, ParticipantRole, ServiceRegistry
from .trading import (
    EquityLeg,
    MoneyLeg,
    Rejection,
    SettlementInstruction,
    Side,
    TradeStatus,
)
from .exchange import TradeReport


class SettlementFailed(Exception):
    def __init__(self, instruction: SettlementInstruction, failed_leg: str, reason: str):
        super().__init__(f"instruction {instruction.instruction_id}: {failed_leg} leg failed ({reason})")
        self.instruction = instruction
        self.failed_leg = failed_leg


@dataclass(frozen=True)
class ClientTradeRecord:
    """A custodian's per-allocation trade submission, covering one side of a
    street trade's block order after affirmation."""

    trade_id: str
    block_order_id: str
    side: Side
    symbol: str
    quantity: int
    price: Money
    account: str          # custodian omnibus


@dataclass(frozen=True)
class Obligation:
    kind: str             # "money" | "equity" | "net"
    party: str
    counterparty: str
    symbol: str
    net_quantity: int     # signed; positive = party receives shares
    net_money: Money      # signed; positive = party receives money
    trade_refs: tuple[str, ...]


class ClearingBank:
    role = ParticipantRole.CLEARING_BANK

    def __init__(self, pid: ParticipantId, ledger: Ledger):
        self.pid = pid
        self.ledger = ledger

    def transfer_money(self, src: str, dst: str, amount: Money, cause: str) -> int:
        return self.ledger.transfer_money(src, dst, amount, f"{cause}/bank={self.pid.id}")


class Depository:
    role = ParticipantRole.DEPOSITORY

    def __init__(self, pid: ParticipantId, ledger: Ledger):
        self.pid = pid
        self.ledger = ledger

    def transfer_equity(self, src: str, dst: str, symbol: str, qty: int, cause: str) -> int:
        return self.ledger.transfer_equity(src, dst, symbol, qty, f"{cause}/depository={self.pid.id}")


class ClearingCorporation:
    role = ParticipantRole.CLEARING_CORPORATION

    def __init__(
        self,
        pid: ParticipantId,
        registry: ServiceRegistry,
        ledger: Ledger,
        netting: bool,
        ccp_account: str,
        extended_validation: bool = False,
        max_trade_value: Money | None = None,
    ):
        self.pid = pid
        self.registry = registry
        self.ledger = ledger
        self.netting = netting
        self.ccp_account = ccp_account
        self.extended_validation = extended_validation
        self.max_trade_value = max_trade_value or Money(10**12, ledger.currency)
        self.queued: list[TradeReport] = []
        self.client_records: list[ClientTradeRecord] = []
        self.pending_obligations: list[Obligation] = []
        self.executed_instructions: list[SettlementInstruction] = []
        self._cleared_reports: list[TradeReport] = []
        self._seen_trade_ids: set[str] = set()
        self._street_qty: dict[str, int] = {}       # block/any order id -> executed qty
        self._covered_qty: dict[str, int] = {}      # order id -> custodian-covered qty
        self._order_trades: dict[str, list[TradeReport]] = {}
        self._next_instruction = 1

    # -- intake ---------------------------------------------------------

    def submit_trade(self, record: TradeReport | ClientTradeRecord, source: str) -> Rejection | None:
        """Validate and queue one submission; None means accepted."""
        if source == "exchange":
            return self._accept_street(record)
        if source == "custodian":
            return self._accept_client(record)
        return Rejection("trade_validation", "UnknownSource", source)

    def _accept_street(self, report: TradeReport) -> Rejection | None:
        trade = report.trade
        if trade.trade_id in self._seen_trade_ids:
            return Rejection("trade_validation", "DuplicateTrade", trade.trade_id)
        if trade.quantity <= 0:
            return Rejection("trade_validation", "NonPositiveQuantity", str(trade.quantity))
        if trade.price.amount <= 0:
            return Rejection("trade_validation", "NonPositivePrice", str(trade.price))
        for account in (report.buy_account, report.sell_account):
            if account not in self.ledger.accounts:
                return Rejection("trade_validation", "UnknownAccount", account)
        if self.extended_validation and trade.value > self.max_trade_value:
            return Rejection("trade_validation", "TradeValueTooLarge", str(trade.value))

        self._seen_trade_ids.add(trade.trade_id)
        self.queued.append(report)
        for order_id, deferred in (
            (report.buy_order_id, report.buy_deferred),
            (report.sell_order_id, report.sell_deferred),
        ):
            self._order_trades.setdefault(order_id, []).append(report)
            if deferred:
                self._street_qty[order_id] = self._street_qty.get(order_id, 0) + trade.quantity
        return None

    def _accept_client(self, record: ClientTradeRecord) -> Rejection | None:
        if record.trade_id in self._seen_trade_ids:
            return Rejection("trade_validation", "DuplicateTrade", record.trade_id)
        if record.quantity <= 0:
            return Rejection("trade_validation", "NonPositiveQuantity", str(record.quantity))
        if record.price.amount <= 0:
            return Rejection("trade_validation", "NonPositivePrice", str(record.price))
        if record.account not in self.ledger.accounts:
            return Rejection("trade_validation", "UnknownAccount", record.account)

        self._seen_trade_ids.add(record.trade_id)
        self.client_records.append(record)
        self._covered_qty[record.block_order_id] = (
            self._covered_qty.get(record.block_order_id, 0) + record.quantity
        )
        return None

    def _side_ready(self, order_id: str, deferred: bool) -> bool:
        if not deferred:
            return True
        return self._covered_qty.get(order_id, 0) >= self._street_qty.get(order_id, 0)

    def _ready(self, report: TradeReport) -> bool:
        return self._side_ready(report.buy_order_id, report.buy_deferred) and \
            self._side_ready(report.sell_order_id, report.sell_deferred)

    # -- clearing -------------------------------------------------------

    def clear_rec(self) -> list[Obligation]:
        """Apply the bound clearing rule to every settlement-ready trade."""
        ready = [report for report in self.queued if self._ready(report)]
        self.queued = [report for report in self.queued if not self._ready(report)]
        obligations = self._net(ready) if self.netting else self._gross(ready)
        for report in ready:
            report.trade.advance(TradeStatus.CLEARED)
        self.pending_obligations.extend(obligations)
        self._cleared_reports.extend(ready)
        return obligations

    def _gross(self, reports: list[TradeReport]) -> list[Obligation]:
        obligations: list[Obligation] = []
        for report in reports:
            trade = report.trade
            value = trade.value
            obligations.append(Obligation(
                "money", report.buy_account, report.sell_account, trade.symbol,
                0, -value, (trade.trade_id,),
            ))
            obligations.append(Obligation(
                "equity", report.sell_account, report.buy_account, trade.symbol,
                -trade.quantity, Money(0, self.ledger.currency), (trade.trade_id,),
            ))
        return obligations

    def _net(self, reports: list[TradeReport]) -> list[Obligation]:
        sums: dict[tuple[str, str], tuple[int, int, list[str]]] = {}
        for report in reports:
            trade = report.trade
            value = trade.value.amount
            for account, sign in ((report.buy_account, 1), (report.sell_account, -1)):
                key = (account, trade.symbol)
                qty, money, refs = sums.get(key, (0, 0, []))
                qty += sign * trade.quantity
                money -= sign * value
                refs.append(trade.trade_id)
                sums[key] = (qty, money, refs)
        obligations = []
        for (account, symbol) in sorted(sums):
            qty, money, refs = sums[(account, symbol)]
            if qty == 0 and money == 0:
                continue
            obligations.append(Obligation(
                "net", account, self.ccp_account, symbol,
                qty, Money(money, self.ledger.currency), tuple(refs),
            ))
        return obligations

    # -- settlement -----------------------------------------------------

    def settle_rec(self) -> list[SettlementInstruction]:
        """Execute pending obligations as atomic DVP instructions."""
        if not self.pending_obligations:
            return []
        bank, depository = self._infrastructure()
        if self.netting:
            executed = self._settle_netted(bank, depository)
        else:
            executed = self._settle_gross(bank, depository)
        for report in self._cleared_reports:
            if report.trade.status is TradeStatus.CLEARED:
                report.trade.advance(TradeStatus.SETTLED)
        self.pending_obligations = []
        self.executed_instructions.extend(executed)
        return executed

    def _infrastructure(self) -> tuple[ClearingBank, Depository]:
        banks = self.registry.list_by_role(ParticipantRole.CLEARING_BANK)
        depositories = self.registry.list_by_role(ParticipantRole.DEPOSITORY)
        if not banks:
            raise NotFound("no clearing bank registered")
        if not depositories:
            raise NotFound("no depository registered")
        return self.registry.lookup(banks[0]), self.registry.lookup(depositories[0])

    def _next_id(self) -> str:
        iid = f"{self.pid.id}-S{self._next_instruction}"
        self._next_instruction += 1
        return iid

    def _settle_gross(self, bank: ClearingBank, depository: Depository) -> list[SettlementInstruction]:
        # money and equity obligations arrive pairwise per trade
        by_trade: dict[str, dict[str, Obligation]] = {}
        for obligation in self.pending_obligations:
            by_trade.setdefault(obligation.trade_refs[0], {})[obligation.kind] = obligation
        executed = []
        for trade_id, pair in by_trade.items():
            money_ob, equity_ob = pair["money"], pair["equity"]
            instruction = SettlementInstruction(
                instruction_id=self._next_id(),
                money_leg=MoneyLeg(money_ob.party, money_ob.counterparty, -money_ob.net_money),
                equity_leg=EquityLeg(
                    equity_ob.party, equity_ob.counterparty,
                    equity_ob.symbol, -equity_ob.net_quantity,
                ),
                trade_refs=(trade_id,),
            )
            self._check_legs(instruction)
            self._execute_instruction(instruction, bank, depository)
            executed.append(instruction)
        return executed

    def _settle_netted(self, bank: ClearingBank, depository: Depository) -> list[SettlementInstruction]:
        instructions = []
        for obligation in self.pending_obligations:
            money_leg = None
            if obligation.net_money.amount < 0:
                money_leg = MoneyLeg(obligation.party, self.ccp_account, -obligation.net_money)
            elif obligation.net_money.amount > 0:
                money_leg = MoneyLeg(self.ccp_account, obligation.party, obligation.net_money)
            equity_leg = None
            if obligation.net_quantity < 0:
                equity_leg = EquityLeg(
                    obligation.party, self.ccp_account, obligation.symbol, -obligation.net_quantity)
            elif obligation.net_quantity > 0:
                equity_leg = EquityLeg(
                    self.ccp_account, obligation.party, obligation.symbol, obligation.net_quantity)
            instructions.append(SettlementInstruction(
                instruction_id=self._next_id(),
                money_leg=money_leg,
                equity_leg=equity_leg,
                trade_refs=obligation.trade_refs,
            ))

        # whole-cycle precheck: every account-side debit must be affordable
        # cumulatively, before any leg commits
        sim_money: dict[str, int] = {}
        sim_equity: dict[tuple[str, str], int] = {}
        for instruction in instructions:
            leg = instruction.money_leg
            if leg and leg.payer != self.ccp_account:
                short = sim_money.get(leg.payer, self.ledger.balance(leg.payer).amount) - leg.amount.amount
                if short < 0:
                    raise SettlementFailed(instruction, "money", f"{leg.payer} short {-short}")
                sim_money[leg.payer] = short
            eleg = instruction.equity_leg
            if eleg and eleg.deliverer != self.ccp_account:
                key = (eleg.deliverer, eleg.symbol)
                held = sim_equity.get(key, self.ledger.position(eleg.deliverer, eleg.symbol))
                if held < eleg.quantity:
                    raise SettlementFailed(instruction, "equity", f"{eleg.deliverer} short {eleg.quantity - held}")
                sim_equity[key] = held - eleg.quantity

        # commit leg-wise: everything into the CCP first, then everything out,
        # so the CCP account never overdraws; the precheck above guarantees
        # no transfer can fail once the first one commits
        for instruction in instructions:
            leg, eleg = instruction.money_leg, instruction.equity_leg
            cause = f"dvp:{instruction.instruction_id}"
            if leg and leg.payee == self.ccp_account:
                bank.transfer_money(leg.payer, leg.payee, leg.amount, cause)
            if eleg and eleg.receiver == self.ccp_account:
                depository.transfer_equity(eleg.deliverer, eleg.receiver, eleg.symbol, eleg.quantity, cause)
        for instruction in instructions:
            leg, eleg = instruction.money_leg, instruction.equity_leg
            cause = f"dvp:{instruction.instruction_id}"
            if leg and leg.payer == self.ccp_account:
                bank.transfer_money(leg.payer, leg.payee, leg.amount, cause)
            if eleg and eleg.deliverer == self.ccp_account:
                depository.transfer_equity(eleg.deliverer, eleg.receiver, eleg.symbol, eleg.quantity, cause)
        return instructions

    def _check_legs(self, instruction: SettlementInstruction) -> None:
        leg = instruction.money_leg
        if leg and not self.ledger.can_pay(leg.payer, leg.amount):
            raise SettlementFailed(instruction, "money", f"{leg.payer} cannot pay {leg.amount}")
        eleg = instruction.equity_leg
        if eleg and not self.ledger.can_deliver(eleg.deliverer, eleg.symbol, eleg.quantity):
            raise SettlementFailed(
                instruction, "equity", f"{eleg.deliverer} cannot deliver {eleg.quantity} {eleg.symbol}")

    def _execute_instruction(
        self,
        instruction: SettlementInstruction,
        bank: ClearingBank,
        depository: Depository,
    ) -> None:
        cause = f"dvp:{instruction.instruction_id}"
        if instruction.money_leg:
            leg = instruction.money_leg
            bank.transfer_money(leg.payer, leg.payee, leg.amount, cause)
        if instruction.equity_leg:
            eleg = instruction.equity_leg
            depository.transfer_equity(eleg.deliverer, eleg.receiver, eleg.symbol, eleg.quantity, cause)

    # -- bookkeeping ----------------------------------------------------

    def is_order_settled(self, order_id: str) -> bool:
        """Settlement status inquiry: every street trade of `order_id` settled."""
        reports = self._order_trades.get(order_id, [])
        return bool(reports) and all(
            report.trade.status is TradeStatus.SETTLED for report in reports)

    def queue_size(self) -> int:
        return len(self.queued)

    def unsettled_obligations(self) -> int:
        return len(self.pending_obligations)

    def instruction_export_lines(self) -> list[str]:
        lines = []
        for instruction in self.executed_instructions:
            money = instruction.money_leg
            equity = instruction.equity_leg
            mtxt = f"{money.payer}->{money.payee}:{money.amount.amount}" if money else "-"
            etxt = (f"{equity.deliverer}->{equity.receiver}:{equity.quantity}{equity.symbol}"
                    if equity else "-")
            lines.append(f"{instruction.instruction_id}|{mtxt}|{etxt}|{','.join(instruction.trade_refs)}")
        return lines
