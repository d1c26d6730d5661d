"""The exchange: order validation, the book, and per-type matching.

Resting orders are ranked by price first (higher bid / lower ask), then by
the product's secondary precedence variant, then by its sequence-number
tie-break variant; unique sequence numbers make the ranking a strict total
order. Execution always happens at the resting order's price. Market
orders never rest: any unfilled remainder cancels.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .money import Money
from .registry import NotFound, ParticipantId, ParticipantRole, ServiceRegistry
from .trading import ClientKind, Order, OrderStatus, OrderType, Rejection, Side, Trade


class BookInvariantViolation(RuntimeError):
    """The book crossed between operations: an internal defect, never handled."""


class SecondaryPrecedence(enum.Enum):
    TIME_PRIORITY = "TimePriority"
    SIZE_PRIORITY = "SizePriority"


class TieBreak(enum.Enum):
    FIFO = "FifoTieBreak"
    LIFO = "LifoTieBreak"


@dataclass(frozen=True)
class PrecedenceComparator:
    secondary: SecondaryPrecedence
    tie_break: TieBreak

    def key(self, order: Order):
        """Sort key; lowest key = first to trade. Total because seq is unique."""
        price = order.limit_price.amount if order.limit_price else 0
        primary = -price if order.side is Side.BUY else price
        if self.secondary is SecondaryPrecedence.TIME_PRIORITY:
            second = order.seq
        else:
            second = -order.remaining
        third = order.seq if self.tie_break is TieBreak.FIFO else -order.seq
        return (primary, second, third)


ALL_COMPARATORS = tuple(
    PrecedenceComparator(secondary, tie_break)
    for secondary in SecondaryPrecedence
    for tie_break in TieBreak
)


class OrderBook:
    """One symbol's resting orders. The owning exchange serializes access.

    Precedence is computed at selection time rather than kept as a sorted
    structure: under size priority a partial fill re-ranks the order, so
    any stored order would go stale.
    """

    def __init__(self, symbol: str, comparator: PrecedenceComparator):
        self.symbol = symbol
        self.comparator = comparator
        self.bids: list[Order] = []
        self.asks: list[Order] = []

    def side(self, side: Side) -> list[Order]:
        return self.bids if side is Side.BUY else self.asks

    def best(self, side: Side) -> Order | None:
        resting = self.side(side)
        if not resting:
            return None
        return min(resting, key=self.comparator.key)

    def best_price(self, side: Side) -> Money | None:
        best = self.best(side)
        return best.limit_price if best else None

    def depth(self) -> int:
        return len(self.bids) + len(self.asks)

    def is_crossed(self) -> bool:
        if not self.bids or not self.asks:
            return False
        top_bid = max(order.limit_price.amount for order in self.bids)
        low_ask = min(order.limit_price.amount for order in self.asks)
        return top_bid >= low_ask

    def _price_compatible(self, incoming: Order, resting: Order) -> bool:
        if incoming.order_type is OrderType.MARKET:
            return True
        if incoming.side is Side.BUY:
            return incoming.limit_price >= resting.limit_price
        return incoming.limit_price <= resting.limit_price

    def fillable_quantity(self, incoming: Order) -> int:
        """Shares available at compatible prices; does not mutate the book."""
        return sum(
            resting.remaining
            for resting in self.side(incoming.side.opposite)
            if self._price_compatible(incoming, resting)
        )

    def submit(self, incoming: Order, make_trade) -> list[Trade]:
        """Match `incoming` per its order type; returns executed trades.

        `make_trade(buy_order, sell_order, price, qty) -> Trade` supplies
        trade identity so the book stays reusable outside an exchange.
        """
        if incoming.order_type is OrderType.FILL_OR_KILL:
            if self.fillable_quantity(incoming) < incoming.remaining:
                incoming.status = OrderStatus.CANCELLED
                return []

        trades = self._sweep(incoming, make_trade)

        if incoming.remaining == 0:
            incoming.status = OrderStatus.FILLED
        elif incoming.order_type is OrderType.LIMIT:
            incoming.status = OrderStatus.PARTIALLY_FILLED if trades else OrderStatus.RESTING
            self.side(incoming.side).append(incoming)
        else:
            incoming.status = OrderStatus.CANCELLED

        if self.is_crossed():
            raise BookInvariantViolation(f"{self.symbol} book crossed after {incoming.order_id}")
        return trades

    def _sweep(self, incoming: Order, make_trade) -> list[Trade]:
        trades: list[Trade] = []
        opposite = self.side(incoming.side.opposite)
        while incoming.remaining > 0 and opposite:
            resting = min(opposite, key=self.comparator.key)
            if not self._price_compatible(incoming, resting):
                break
            qty = min(incoming.remaining, resting.remaining)
            price = resting.limit_price
            buy, sell = (incoming, resting) if incoming.side is Side.BUY else (resting, incoming)
            trades.append(make_trade(buy, sell, price, qty))
            incoming.remaining -= qty
            resting.remaining -= qty
            if resting.remaining == 0:
                resting.status = OrderStatus.FILLED
                opposite.remove(resting)
            else:
                resting.status = OrderStatus.PARTIALLY_FILLED
        return trades


@dataclass
class TradeReport:
    """What the exchange tells the clearing corporation about one trade.

    Each side carries the account that will settle it and whether that side
    must first be covered by custodian client-level records (institutional
    orders settle from the custodian omnibus after affirmation).
    """

    trade: Trade
    buy_order_id: str
    sell_order_id: str
    buy_account: str
    sell_account: str
    buy_deferred: bool
    sell_deferred: bool


class ExchangeService:
    """One exchange instance with the product's bound matching variants."""

    role = ParticipantRole.EXCHANGE

    def __init__(
        self,
        pid: ParticipantId,
        registry: ServiceRegistry,
        symbols: set[str],
        comparator: PrecedenceComparator,
        supported_types: frozenset[OrderType],
        extended_validation: bool = False,
        max_order_quantity: int = 1_000_000,
    ):
        self.pid = pid
        self.registry = registry
        self.symbols = set(symbols)
        self.comparator = comparator
        self.supported_types = supported_types
        self.extended_validation = extended_validation
        self.max_order_quantity = max_order_quantity
        self.books: dict[str, OrderBook] = {
            symbol: OrderBook(symbol, comparator) for symbol in sorted(self.symbols)
        }
        self.orders: dict[str, Order] = {}
        self.executed: list[Trade] = []
        self._unreported: list[TradeReport] = []
        self._next_seq = 1
        self._next_trade = 1

    def best_quote(self, symbol: str, side: Side) -> Money | None:
        book = self.books.get(symbol)
        return book.best_price(side) if book else None

    def book_depth(self, symbol: str) -> int:
        book = self.books.get(symbol)
        return book.depth() if book else 0

    def validate_incoming_order(self, order: Order) -> Rejection | None:
        """Base rule set, plus a size cap under the extended variant.

        Returns None on acceptance (order gets its seq number) and a
        Rejection identifying the violated rule otherwise.
        """
        if order.symbol not in self.symbols:
            return self._reject(order, "UnknownSymbol", f"symbol {order.symbol}")
        if order.quantity <= 0:
            return self._reject(order, "NonPositiveQuantity", f"quantity {order.quantity}")
        if order.order_type not in self.supported_types:
            return self._reject(order, "UnsupportedOrderType", order.order_type.value)
        if order.order_type.requires_price:
            if order.limit_price is None:
                return self._reject(order, "MissingPrice", order.order_type.value)
            if order.limit_price.amount <= 0:
                return self._reject(order, "NonPositivePrice", str(order.limit_price))
        elif order.limit_price is not None:
            return self._reject(order, "PriceNotAllowed", "market order carries a price")
        if self.extended_validation and order.quantity > self.max_order_quantity:
            return self._reject(order, "OrderTooLarge", f"quantity {order.quantity}")

        order.seq = self._next_seq
        self._next_seq += 1
        order.status = OrderStatus.VALIDATED
        self.orders[order.order_id] = order
        return None

    def _reject(self, order: Order, rule: str, detail: str) -> Rejection:
        order.status = OrderStatus.REJECTED
        return Rejection("exchange_validation", rule, detail)

    def submit_order(self, order: Order) -> list[Trade]:
        """Match a validated order. Trades are queued for the clearing report."""
        if order.seq is None:
            raise ValueError(f"order {order.order_id} was not validated here")
        book = self.books[order.symbol]
        trades = book.submit(order, self._make_trade)
        return trades

    def _make_trade(self, buy: Order, sell: Order, price: Money, qty: int) -> Trade:
        trade = Trade(
            trade_id=f"{self.pid.id}-T{self._next_trade}",
            buy_order_id=buy.order_id,
            sell_order_id=sell.order_id,
            symbol=buy.symbol,
            price=price,
            quantity=qty,
            exchange=self.pid,
        )
        self._next_trade += 1
        self.executed.append(trade)
        self._unreported.append(TradeReport(
            trade=trade,
            buy_order_id=buy.order_id,
            sell_order_id=sell.order_id,
            buy_account=buy.settlement_account,
            sell_account=sell.settlement_account,
            buy_deferred=buy.client_kind is ClientKind.INSTITUTIONAL,
            sell_deferred=sell.client_kind is ClientKind.INSTITUTIONAL,
        ))
        for order in (buy, sell):
            self.registry.lookup(order.broker).execution_report(order.order_id, trade)
        return trade

    def pending_report_count(self) -> int:
        return len(self._unreported)

    def report_trades_rec(self) -> int:
        """Push every executed-but-unreported trade to the clearing corporation."""
        clearing_ids = self.registry.list_by_role(ParticipantRole.CLEARING_CORPORATION)
        if not clearing_ids:
            raise NotFound("no clearing corporation registered")
        clearing = self.registry.lookup(clearing_ids[0])
        reported = 0
        while self._unreported:
            report = self._unreported.pop(0)
            result = clearing.submit_trade(report, source="exchange")
            if result is not None:
                raise BookInvariantViolation(
                    f"clearing rejected exchange trade {report.trade.trade_id}: {result}"
                )
            reported += 1
        return reported

    def trade_log_lines(self) -> list[str]:
        return [trade.export_line() for trade in self.executed]
