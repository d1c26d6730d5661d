"""Scenario definitions: who participates, who holds what, who orders what.

Scenario files (``.scn``) are line-oriented UTF-8 with ``#`` comments:

    scenario: <id>
    currency: <code>
    symbol: <SYM>                       (repeatable)
    broker|exchange|clearing_corporation|clearing_bank|depository|custodian: <ID>
    retail: <ACCOUNT> broker=<ID>
    institution: <ACCOUNT> broker=<ID> custodian=<ID> ends=<A1,A2,...>
    endow: <ACCOUNT> [money=<cents>] [<SYM>=<qty>]...
    order: <ACCOUNT> <buy|sell> <qty> <SYM> <market|limit|ioc|fok> [<price>] [cap=<cents>]
    allocate: <ACCOUNT> order=<n> <END=QTY>...
    expect: <ACCOUNT> [money=<cents>] [<SYM>=<qty>]...

Order lines are numbered from 1 in file order; ``allocate`` references them.
All orders run before all allocations (the street execution must exist
before a manager can split it).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .money import Money
from .registry import ParticipantRole
from .trading import OrderType, Side


class ScenarioFormatError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


SCENARIO_IDS = ("retail_retail", "retail_institutional", "institutional_institutional")

_ORDER_TYPES = {
    "market": OrderType.MARKET,
    "limit": OrderType.LIMIT,
    "ioc": OrderType.IMMEDIATE_OR_CANCEL,
    "fok": OrderType.FILL_OR_KILL,
}

_PARTICIPANT_KEYS = {role.value: role for role in ParticipantRole}


@dataclass(frozen=True)
class RetailClient:
    account: str
    broker: str


@dataclass(frozen=True)
class Institution:
    account: str
    broker: str
    custodian: str
    end_clients: tuple[str, ...]


@dataclass(frozen=True)
class Endowment:
    account: str
    money: int
    positions: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class OrderAction:
    index: int
    client: str
    side: Side
    quantity: int
    symbol: str
    order_type: OrderType
    price: int | None
    cap: int | None


@dataclass(frozen=True)
class AllocateAction:
    institution: str
    order_index: int
    splits: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class ExpectedBalance:
    account: str
    money: int
    positions: tuple[tuple[str, int], ...]


@dataclass
class Scenario:
    scenario_id: str
    currency: str = "USD"
    symbols: tuple[str, ...] = ()
    participants: dict[ParticipantRole, tuple[str, ...]] = field(default_factory=dict)
    retail_clients: tuple[RetailClient, ...] = ()
    institutions: tuple[Institution, ...] = ()
    endowments: tuple[Endowment, ...] = ()
    orders: tuple[OrderAction, ...] = ()
    allocations: tuple[AllocateAction, ...] = ()
    expected: tuple[ExpectedBalance, ...] = ()
    contract_price_perturbation: int = 0  # test hook: cents added to one contract

    def participant_ids(self, role: ParticipantRole) -> tuple[str, ...]:
        return self.participants.get(role, ())

    def broker_of(self, client_account: str) -> str:
        for retail in self.retail_clients:
            if retail.account == client_account:
                return retail.broker
        for institution in self.institutions:
            if institution.account == client_account:
                return institution.broker
        raise KeyError(client_account)

    def is_institution(self, client_account: str) -> bool:
        return any(i.account == client_account for i in self.institutions)

    def money(self, amount: int) -> Money:
        return Money(amount, self.currency)


def _split_kv(parts: list[str], line_no: int) -> dict[str, str]:
    out = {}
    for part in parts:
        if "=" not in part:
            raise ScenarioFormatError(f"expected key=value, got {part!r}", line_no)
        key, value = part.split("=", 1)
        out[key] = value
    return out


def _parse_holdings(parts: list[str], line_no: int) -> tuple[int, tuple[tuple[str, int], ...]]:
    money = 0
    positions = []
    for key, value in _split_kv(parts, line_no).items():
        try:
            number = int(value)
        except ValueError:
            raise ScenarioFormatError(f"bad integer {value!r}", line_no) from None
        if key == "money":
            money = number
        else:
            positions.append((key, number))
    return money, tuple(positions)


def parse_scenario(text: str) -> Scenario:
    scenario_id = ""
    currency = "USD"
    symbols: list[str] = []
    participants: dict[ParticipantRole, list[str]] = {}
    retail: list[RetailClient] = []
    institutions: list[Institution] = []
    endowments: list[Endowment] = []
    orders: list[OrderAction] = []
    allocations: list[AllocateAction] = []
    expected: list[ExpectedBalance] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ScenarioFormatError(f"expected 'key: value', got {line!r}", line_no)
        key, rest = line.split(":", 1)
        key = key.strip()
        parts = rest.split()

        if key == "scenario":
            scenario_id = parts[0]
        elif key == "currency":
            currency = parts[0]
        elif key == "symbol":
            symbols.append(parts[0])
        elif key in _PARTICIPANT_KEYS:
            participants.setdefault(_PARTICIPANT_KEYS[key], []).append(parts[0])
        elif key == "retail":
            kv = _split_kv(parts[1:], line_no)
            retail.append(RetailClient(parts[0], kv["broker"]))
        elif key == "institution":
            kv = _split_kv(parts[1:], line_no)
            institutions.append(Institution(
                parts[0], kv["broker"], kv["custodian"],
                tuple(kv["ends"].split(","))))
        elif key == "endow":
            money, positions = _parse_holdings(parts[1:], line_no)
            endowments.append(Endowment(parts[0], money, positions))
        elif key == "order":
            if len(parts) < 5:
                raise ScenarioFormatError("order needs: client side qty symbol type", line_no)
            client, side_text, qty_text, symbol, type_text = parts[:5]
            if type_text not in _ORDER_TYPES:
                raise ScenarioFormatError(f"unknown order type {type_text!r}", line_no)
            order_type = _ORDER_TYPES[type_text]
            price = None
            cap = None
            for extra in parts[5:]:
                if extra.startswith("cap="):
                    cap = int(extra[4:])
                else:
                    price = int(extra)
            orders.append(OrderAction(
                index=len(orders) + 1,
                client=client,
                side=Side(side_text),
                quantity=int(qty_text),
                symbol=symbol,
                order_type=order_type,
                price=price,
                cap=cap,
            ))
        elif key == "allocate":
            kv = _split_kv(parts[1:], line_no)
            order_index = int(kv.pop("order"))
            splits = tuple((end, int(qty)) for end, qty in kv.items())
            allocations.append(AllocateAction(parts[0], order_index, splits))
        elif key == "expect":
            money, positions = _parse_holdings(parts[1:], line_no)
            expected.append(ExpectedBalance(parts[0], money, positions))
        else:
            raise ScenarioFormatError(f"unknown directive {key!r}", line_no)

    if not scenario_id:
        raise ScenarioFormatError("missing 'scenario:' header", 1)
    return Scenario(
        scenario_id=scenario_id,
        currency=currency,
        symbols=tuple(symbols),
        participants={role: tuple(ids) for role, ids in participants.items()},
        retail_clients=tuple(retail),
        institutions=tuple(institutions),
        endowments=tuple(endowments),
        orders=tuple(orders),
        allocations=tuple(allocations),
        expected=tuple(expected),
    )
