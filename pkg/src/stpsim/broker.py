"""The broker: client intake pipeline, routing, post-trade paperwork.

Order intake runs a fixed pipeline whose stages are filled by the
product's bound variants: validation -> risks -> governmental compliance ->
client compliance -> venue selection -> prepayment -> routing. A rejection
at any stage stops the pipeline and leaves the ledger net-unchanged (a
prepayment taken before a routing rejection is refunded in the same call).

Retail clients prepay the broker house account (money for buys at the
limit or cap price, shares for sells) and are credited back after street
settlement. Institutional clients never prepay: their assets sit at the
custodian, which takes over settlement once it affirms the broker's
contracts against the manager's allocation details.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .ledger import InsufficientFunds, InsufficientPosition, Ledger
from .money import Money
from .registry import ParticipantId, ParticipantRole, ServiceRegistry
from .trading import (
    Affirmation,
    AllocationDetail,
    AuditEvent,
    ClientKind,
    Contract,
    Order,
    OrderStatus,
    OrderType,
    Rejection,
    Side,
    Trade,
    TradeStatus,
)


class BrokerError(Exception):
    pass


class NoVenues(BrokerError):
    pass


class NoCandidates(BrokerError):
    pass


class UnknownContracts(BrokerError):
    pass


@dataclass(frozen=True)
class OrderDraft:
    client: str
    side: Side
    symbol: str
    quantity: int
    order_type: OrderType
    limit_price: Money | None = None
    price_cap: Money | None = None          # funding bound for retail market buys
    venue: ParticipantId | None = None


@dataclass(frozen=True)
class BrokerConfig:
    """The broker pipeline's bound variants, projected from a ProductSpec."""

    extended_order_checks: bool = False
    portfolio_algorithm: str | None = None
    venue_algorithm: str | None = None
    offered_types: frozenset[OrderType] = frozenset(OrderType)
    money_method: str = "BrokerBookEntryPayment"
    equity_method: str = "BrokerBookEntryEquityTransfer"
    risk_checks: frozenset[str] = frozenset({"DuplicateOrderCheck"})
    restricted_screening: bool = True
    value_cap_enabled: bool = True
    extended_alloc_checks: bool = False


@dataclass
class BrokerParams:
    """Operational data the variants consume; not part of the feature model."""

    restricted_symbols: frozenset[str] = frozenset()
    max_order_value: Money = field(default_factory=lambda: Money(100_000_000))
    client_value_caps: dict[str, Money] = field(default_factory=dict)
    max_order_quantity: int = 1_000_000

    def value_cap_for(self, client: str) -> Money:
        return self.client_value_caps.get(client, self.max_order_value)


class BrokerService:
    role = ParticipantRole.BROKER

    def __init__(
        self,
        pid: ParticipantId,
        registry: ServiceRegistry,
        ledger: Ledger,
        house_account: str,
        config: BrokerConfig,
        params: BrokerParams | None = None,
    ):
        self.pid = pid
        self.registry = registry
        self.ledger = ledger
        self.house_account = house_account
        self.config = config
        self.params = params or BrokerParams()
        self.retail_clients: set[str] = set()
        self.institutions: dict[str, ParticipantId] = {}  # institution account -> custodian
        self.orders: dict[str, Order] = {}
        self.fills: dict[str, list[Trade]] = {}
        self.audit: list[AuditEvent] = []
        self.contracts_sent: dict[str, tuple[Contract, ...]] = {}  # block order -> contracts
        self.responsibility: dict[str, str] = {}  # order id -> "broker" | "custodian"
        self._prepaid_money: dict[str, Money] = {}
        self._prepaid_shares: dict[str, int] = {}
        self._credited: set[tuple[str, str]] = set()
        self._reconciled: set[str] = set()
        self._seen_drafts: set[tuple] = set()
        self._current_step = 0
        self._next_order = 1
        self._next_contract = 1

    # -- wiring -----------------------------------------------------------

    def add_retail_client(self, account: str) -> None:
        self.retail_clients.add(account)

    def add_institution(self, account: str, custodian: ParticipantId) -> None:
        self.institutions[account] = custodian

    def mark_step(self, step: int) -> None:
        """Called by the orchestrator; duplicate-order detection is per step."""
        self._current_step = step

    # -- order intake -------------------------------------------------------

    def place_retail_order(self, draft: OrderDraft) -> str | Rejection:
        return self._run_pipeline(draft, ClientKind.RETAIL)

    def place_institutional_order(self, draft: OrderDraft) -> str | Rejection:
        return self._run_pipeline(draft, ClientKind.INSTITUTIONAL)

    def _run_pipeline(self, draft: OrderDraft, kind: ClientKind) -> str | Rejection:
        order_id = f"{self.pid.id}-O{self._next_order}"
        self._next_order += 1

        for stage, check in (
            ("validation", lambda: self._stage_validation(draft, kind)),
            ("risk", lambda: self._stage_risk(draft, kind)),
            ("governmental_compliance", lambda: self._stage_governmental(draft)),
            ("client_compliance", lambda: self._stage_client_compliance(draft)),
        ):
            rule = check()
            if rule:
                return self._rejected(order_id, stage, rule)
            self._audit(order_id, stage)

        try:
            venue = self._stage_venue(draft)
        except NoVenues:
            return self._rejected(order_id, "venue_selection", "NoVenues")
        self._audit(order_id, "venue_selection")

        order = self._build_order(order_id, draft, kind)

        if kind is ClientKind.RETAIL:
            rule = self._stage_prepayment(order, draft)
            if rule:
                return self._rejected(order_id, "prepayment", rule)
            self._audit(order_id, "prepayment")

        rejection = self._stage_routing(order, venue)
        if rejection:
            self._refund_prepayment(order)
            return self._rejected(order_id, "routing", rejection.rule)
        self._audit(order_id, "routing")

        self.orders[order_id] = order
        self.responsibility[order_id] = "broker"
        return order_id

    def _rejected(self, order_id: str, stage: str, rule: str) -> Rejection:
        self.audit.append(AuditEvent(order_id, stage, "rejected", rule))
        return Rejection(stage, rule)

    def _audit(self, order_id: str, stage: str) -> None:
        self.audit.append(AuditEvent(order_id, stage, "ok"))

    def _stage_validation(self, draft: OrderDraft, kind: ClientKind) -> str | None:
        if kind is ClientKind.RETAIL:
            if draft.client not in self.retail_clients or draft.client not in self.ledger.accounts:
                return "UnknownClient"
        else:
            if draft.client not in self.institutions or draft.client not in self.ledger.accounts:
                return "UnknownClient"
        if draft.quantity <= 0:
            return "NonPositiveQuantity"
        if draft.order_type not in self.config.offered_types:
            return "UnsupportedOrderType"
        if draft.order_type.requires_price:
            if draft.limit_price is None:
                return "MissingPrice"
            if draft.limit_price.amount <= 0:
                return "NonPositivePrice"
        else:
            if draft.limit_price is not None:
                return "PriceNotAllowed"
            needs_cap = kind is ClientKind.RETAIL and draft.side is Side.BUY
            if needs_cap and draft.price_cap is None:
                return "MissingPriceCap"
            if draft.price_cap is not None and draft.price_cap.amount <= 0:
                return "NonPositivePrice"
        if self.config.extended_order_checks and draft.quantity > self.params.max_order_quantity:
            return "OrderTooLarge"
        return None

    def _stage_risk(self, draft: OrderDraft, kind: ClientKind) -> str | None:
        if "DuplicateOrderCheck" in self.config.risk_checks:
            key = (self._current_step, draft.client, draft.symbol, draft.side,
                   draft.quantity)
            if key in self._seen_drafts:
                return "DuplicateOrder"
            self._seen_drafts.add(key)
        if "PrefundingRiskCheck" in self.config.risk_checks and kind is ClientKind.RETAIL:
            if draft.side is Side.BUY:
                required = self._funding_price(draft) * draft.quantity
                if not self.ledger.can_pay(draft.client, required):
                    return "InsufficientPrefunding"
            elif not self.ledger.can_deliver(draft.client, draft.symbol, draft.quantity):
                return "InsufficientPrefunding"
        return None

    def _stage_governmental(self, draft: OrderDraft) -> str | None:
        if self.config.restricted_screening and draft.symbol in self.params.restricted_symbols:
            return "RestrictedSymbol"
        return None

    def _stage_client_compliance(self, draft: OrderDraft) -> str | None:
        if not self.config.value_cap_enabled:
            return None
        price = draft.limit_price or draft.price_cap
        if price is None:
            return None
        if price * draft.quantity > self.params.value_cap_for(draft.client):
            return "OrderValueOverCap"
        return None

    def _stage_venue(self, draft: OrderDraft) -> ParticipantId:
        if self.config.venue_algorithm:
            venues = self.registry.list_by_role(ParticipantRole.EXCHANGE)
            return self.select_venue(draft, venues)
        if draft.venue is not None:
            return draft.venue
        raise NoVenues("no venue algorithm bound and draft names no venue")

    def _build_order(self, order_id: str, draft: OrderDraft, kind: ClientKind) -> Order:
        if kind is ClientKind.RETAIL:
            settlement = self.house_account
        else:
            custodian = self.registry.lookup(self.institutions[draft.client])
            settlement = custodian.omnibus_account
        return Order(
            order_id=order_id,
            client=draft.client,
            broker=self.pid,
            side=draft.side,
            symbol=draft.symbol,
            quantity=draft.quantity,
            order_type=draft.order_type,
            limit_price=draft.limit_price,
            client_kind=kind,
            settlement_account=settlement,
        )

    def _funding_price(self, draft: OrderDraft) -> Money:
        price = draft.limit_price or draft.price_cap
        assert price is not None  # validation guarantees it for retail buys
        return price

    def _stage_prepayment(self, order: Order, draft: OrderDraft) -> str | None:
        try:
            if order.side is Side.BUY:
                amount = self._funding_price(draft) * order.quantity
                self.ledger.transfer_money(
                    order.client, self.house_account, amount,
                    f"prepay:{order.order_id}/method={self.config.money_method}")
                self._prepaid_money[order.order_id] = amount
            else:
                self.ledger.transfer_equity(
                    order.client, self.house_account, order.symbol, order.quantity,
                    f"prepay:{order.order_id}/method={self.config.equity_method}")
                self._prepaid_shares[order.order_id] = order.quantity
        except InsufficientFunds:
            return "InsufficientFunds"
        except InsufficientPosition:
            return "InsufficientPosition"
        return None

    def _refund_prepayment(self, order: Order) -> None:
        amount = self._prepaid_money.pop(order.order_id, None)
        if amount is not None:
            self.ledger.transfer_money(
                self.house_account, order.client, amount,
                f"refund:{order.order_id}/method={self.config.money_method}")
        shares = self._prepaid_shares.pop(order.order_id, None)
        if shares is not None:
            self.ledger.transfer_equity(
                self.house_account, order.client, order.symbol, shares,
                f"refund:{order.order_id}/method={self.config.equity_method}")

    def _stage_routing(self, order: Order, venue: ParticipantId) -> Rejection | None:
        exchange = self.registry.lookup(venue)
        rejection = exchange.validate_incoming_order(order)
        if rejection:
            return rejection
        order.status = OrderStatus.ROUTED
        exchange.submit_order(order)
        return None

    # -- placeholder algorithms ----------------------------------------------

    def select_venue(self, draft: OrderDraft, venues: list[ParticipantId]) -> ParticipantId:
        """Pick an execution venue with the bound placeholder algorithm."""
        if not venues:
            raise NoVenues("no exchanges registered")
        algorithm = self.config.venue_algorithm or "FirstVenueChoice"
        if algorithm == "FirstVenueChoice":
            return venues[0]
        if algorithm == "BestQuoteVenueChoice":
            best_pid, best_amount = None, None
            for pid in venues:
                quote = self.registry.lookup(pid).best_quote(draft.symbol, draft.side.opposite)
                if quote is None:
                    continue
                better = (
                    best_amount is None
                    or (draft.side is Side.BUY and quote.amount < best_amount)
                    or (draft.side is Side.SELL and quote.amount > best_amount)
                )
                if better:
                    best_pid, best_amount = pid, quote.amount
            return best_pid if best_pid is not None else venues[0]
        if algorithm == "LeastLoadedVenueChoice":
            return min(venues, key=lambda pid: (self.registry.lookup(pid).book_depth(draft.symbol),
                                                venues.index(pid)))
        raise BrokerError(f"unknown venue algorithm {algorithm}")

    def optimize_portfolio(self, holdings: dict[str, int], candidates: list[str]) -> dict[str, Fraction]:
        """Target allocation per the bound placeholder; weights sum to exactly 1."""
        if not candidates:
            raise NoCandidates("empty candidate list")
        algorithm = self.config.portfolio_algorithm or "EqualWeightAllocation"
        if algorithm == "EqualWeightAllocation":
            weight = Fraction(1, len(candidates))
            return {symbol: weight for symbol in candidates}
        if algorithm == "SingleBestAllocation":
            return {candidates[0]: Fraction(1)}
        if algorithm == "RankWeightedAllocation":
            n = len(candidates)
            total = n * (n + 1) // 2
            return {symbol: Fraction(n - i, total) for i, symbol in enumerate(candidates)}
        raise BrokerError(f"unknown portfolio algorithm {algorithm}")

    # -- execution and post-trade ---------------------------------------------

    def execution_report(self, order_id: str, trade: Trade) -> None:
        """Exchange callback: one of this broker's orders traded."""
        self.fills.setdefault(order_id, []).append(trade)

    def order_info(self, order_id: str) -> Order:
        """Status inquiry surface for counterpart services (e.g. custodians)."""
        try:
            return self.orders[order_id]
        except KeyError:
            raise BrokerError(f"unknown order {order_id}") from None

    def handle_allocation_details(self, details: list[AllocationDetail]) -> list[Contract] | Rejection:
        rule = self._validate_details(details)
        if rule:
            self.audit.append(AuditEvent(details[0].block_order_id if details else "-",
                                         "allocation_validation", "rejected", rule))
            return Rejection("allocation_validation", rule)

        block_id = details[0].block_order_id
        custodian_pid = self.institutions[details[0].institution]
        custodian = self.registry.lookup(custodian_pid)
        contracts = []
        for detail in details:
            contracts.append(Contract(
                contract_id=f"{self.pid.id}-C{self._next_contract}",
                broker=self.pid,
                custodian=custodian_pid,
                alloc_ref=detail.alloc_id,
                block_order_id=detail.block_order_id,
                symbol=detail.symbol,
                quantity=detail.quantity,
                price=detail.price,
            ))
            self._next_contract += 1
        self.contracts_sent[block_id] = tuple(contracts)
        self.audit.append(AuditEvent(block_id, "allocation_validation", "ok"))
        custodian.receive_contracts(list(contracts))
        return list(contracts)

    def _validate_details(self, details: list[AllocationDetail]) -> str | None:
        if not details:
            return "NoDetails"
        block_id = details[0].block_order_id
        order = self.orders.get(block_id)
        if order is None or order.client_kind is not ClientKind.INSTITUTIONAL:
            return "UnknownBlockOrder"
        if any(d.block_order_id != block_id for d in details):
            return "MixedBlockOrders"
        if any(d.institution != order.client for d in details):
            return "InstitutionMismatch"
        if order.filled_quantity == 0 or not order.is_terminal:
            return "BlockNotFilled"
        if any(d.quantity <= 0 for d in details):
            return "NonPositiveQuantity"
        if sum(d.quantity for d in details) != order.filled_quantity:
            return "QuantityMismatch"
        if any(d.symbol != order.symbol for d in details):
            return "SymbolMismatch"
        fills = self.fills.get(block_id, [])
        fill_prices = {t.price for t in fills}
        if any(d.price not in fill_prices for d in details):
            return "PriceMismatch"
        detail_value = sum(d.price.amount * d.quantity for d in details)
        fill_value = sum(t.price.amount * t.quantity for t in fills)
        if detail_value != fill_value:
            return "PriceMismatch"
        if self.config.extended_alloc_checks:
            if any(not d.end_client_account for d in details):
                return "EmptyEndClientAccount"
            if len({d.alloc_id for d in details}) != len(details):
                return "DuplicateAllocId"
        return None

    def receive_affirmation(self, affirmation: Affirmation) -> None:
        """Custodian affirmed: settlement responsibility leaves this broker."""
        sent = self.contracts_sent.get(affirmation.block_order_id)
        if sent is None:
            raise UnknownContracts(affirmation.block_order_id)
        sent_ids = {c.contract_id for c in sent}
        unknown = set(affirmation.contract_ids) - sent_ids
        if unknown:
            raise UnknownContracts(", ".join(sorted(unknown)))
        self.responsibility[affirmation.block_order_id] = "custodian"

    # -- settlement --------------------------------------------------------

    def settle_retail_rec(self) -> int:
        """Credit retail clients for settled trades; idempotent."""
        credited = 0
        for order_id, order in self.orders.items():
            if order.client_kind is not ClientKind.RETAIL:
                continue
            if self.responsibility.get(order_id) == "custodian":
                continue
            trades = self.fills.get(order_id, [])
            for trade in trades:
                if trade.status is not TradeStatus.SETTLED:
                    continue
                key = (order_id, trade.trade_id)
                if key in self._credited:
                    continue
                if order.side is Side.BUY:
                    self.ledger.transfer_equity(
                        self.house_account, order.client, order.symbol, trade.quantity,
                        f"settle:{trade.trade_id}/method={self.config.equity_method}")
                else:
                    self.ledger.transfer_money(
                        self.house_account, order.client, trade.value,
                        f"settle:{trade.trade_id}/method={self.config.money_method}")
                self._credited.add(key)
                credited += 1
            self._reconcile_terminal(order, trades)
        return credited

    def _reconcile_terminal(self, order: Order, trades: list[Trade]) -> None:
        """Return unused prepayment (or collect a market-buy shortfall) once
        an order is terminal and all its trades are settled and credited."""
        order_id = order.order_id
        if order_id in self._reconciled or not order.is_terminal:
            return
        if any(t.status is not TradeStatus.SETTLED for t in trades):
            return
        if any((order_id, t.trade_id) not in self._credited for t in trades):
            return
        if order.side is Side.BUY and order_id in self._prepaid_money:
            street_cost = sum((t.value for t in trades), Money(0, self.ledger.currency))
            prepaid = self._prepaid_money[order_id]
            if street_cost < prepaid:
                self.ledger.transfer_money(
                    self.house_account, order.client, prepaid - street_cost,
                    f"refund:{order_id}/method={self.config.money_method}")
            elif street_cost > prepaid:
                self.ledger.transfer_money(
                    order.client, self.house_account, street_cost - prepaid,
                    f"collect:{order_id}/method={self.config.money_method}")
        elif order.side is Side.SELL and order_id in self._prepaid_shares:
            residual = self._prepaid_shares[order_id] - order.filled_quantity
            if residual > 0:
                self.ledger.transfer_equity(
                    self.house_account, order.client, order.symbol, residual,
                    f"refund:{order_id}/method={self.config.equity_method}")
        self._reconciled.add(order_id)

    def unaffirmed_blocks(self) -> list[str]:
        return [
            block_id for block_id in self.contracts_sent
            if self.responsibility.get(block_id) != "custodian"
        ]

    def audit_export_lines(self) -> list[str]:
        return [event.export_line() for event in self.audit]
