"""Double-entry ledger of money balances and equity positions.

The ledger is the conservation substrate of the whole simulation: every
money or equity movement debits exactly one account and credits exactly one
other, and is appended to a journal. Failed transfers leave the ledger
untouched. Committed balances can never go negative (there is no credit,
no short selling).

Journal export format (one entry per line, consumed by the report command):

    seq|kind|from|to|amount-or-qty|symbol?|cause

where kind is ``money`` or ``equity`` and symbol is empty for money entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .money import Money


class LedgerError(Exception):
    pass


class UnknownAccount(LedgerError):
    pass


class DuplicateAccount(LedgerError):
    pass


class InsufficientFunds(LedgerError):
    pass


class InsufficientPosition(LedgerError):
    pass


class NonPositiveAmount(LedgerError):
    pass


class NonPositiveQuantity(LedgerError):
    pass


@dataclass
class Account:
    owner: str
    money: Money
    positions: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class JournalEntry:
    seq: int
    kind: str               # "money" | "equity"
    src: str
    dst: str
    amount: int             # minor units for money, share count for equity
    symbol: str | None
    cause: str

    def export_line(self) -> str:
        sym = self.symbol or ""
        return f"{self.seq}|{self.kind}|{self.src}|{self.dst}|{self.amount}|{sym}|{self.cause}"


@dataclass(frozen=True)
class AccountSnapshot:
    money: Money
    positions: dict[str, int]


Snapshot = dict[str, AccountSnapshot]


class Ledger:
    """Single-writer ledger; the orchestrator owns the only mutable handle."""

    def __init__(self, currency: str = "USD"):
        self.currency = currency
        self.accounts: dict[str, Account] = {}
        self.journal: list[JournalEntry] = []

    def open_account(self, owner: str, money: Money | None = None,
                     positions: dict[str, int] | None = None) -> Account:
        if owner in self.accounts:
            raise DuplicateAccount(owner)
        if money is None:
            money = Money(0, self.currency)
        if money.currency != self.currency:
            raise LedgerError(f"account currency {money.currency} != ledger {self.currency}")
        if money.amount < 0 or any(q < 0 for q in (positions or {}).values()):
            raise LedgerError("initial balances must be non-negative")
        acct = Account(owner, money, dict(positions or {}))
        self.accounts[owner] = acct
        return acct

    def account(self, owner: str) -> Account:
        try:
            return self.accounts[owner]
        except KeyError:
            raise UnknownAccount(owner) from None

    def balance(self, owner: str) -> Money:
        return self.account(owner).money

    def position(self, owner: str, symbol: str) -> int:
        return self.account(owner).positions.get(symbol, 0)

    def transfer_money(self, src: str, dst: str, amount: Money, cause: str = "") -> int:
        """Move `amount` from `src` to `dst`; returns the journal entry seq."""
        if amount.currency != self.currency:
            raise LedgerError(f"currency {amount.currency} != ledger {self.currency}")
        if amount.amount <= 0:
            raise NonPositiveAmount(f"transfer of {amount}")
        payer = self.account(src)
        payee = self.account(dst)
        if payer.money < amount:
            raise InsufficientFunds(f"{src} holds {payer.money}, needs {amount}")
        payer.money = payer.money - amount
        payee.money = payee.money + amount
        return self._journal("money", src, dst, amount.amount, None, cause)

    def transfer_equity(self, src: str, dst: str, symbol: str, qty: int, cause: str = "") -> int:
        """Move `qty` shares of `symbol` from `src` to `dst`; returns entry seq."""
        if qty <= 0:
            raise NonPositiveQuantity(f"transfer of {qty} {symbol}")
        holder = self.account(src)
        receiver = self.account(dst)
        held = holder.positions.get(symbol, 0)
        if held < qty:
            raise InsufficientPosition(f"{src} holds {held} {symbol}, needs {qty}")
        holder.positions[symbol] = held - qty
        receiver.positions[symbol] = receiver.positions.get(symbol, 0) + qty
        return self._journal("equity", src, dst, qty, symbol, cause)

    def _journal(self, kind: str, src: str, dst: str, amount: int,
                 symbol: str | None, cause: str) -> int:
        entry = JournalEntry(len(self.journal) + 1, kind, src, dst, amount, symbol, cause)
        self.journal.append(entry)
        return entry.seq

    def can_pay(self, owner: str, amount: Money) -> bool:
        return self.account(owner).money >= amount

    def can_deliver(self, owner: str, symbol: str, qty: int) -> bool:
        return self.account(owner).positions.get(symbol, 0) >= qty

    def snapshot(self) -> Snapshot:
        """Deep copy of all balances; later ledger mutations are invisible to it."""
        return {
            owner: AccountSnapshot(acct.money, {s: q for s, q in acct.positions.items() if q})
            for owner, acct in self.accounts.items()
        }

    def export_journal(self) -> list[str]:
        return [entry.export_line() for entry in self.journal]


def total_money(snap: Snapshot) -> int:
    return sum(acct.money.amount for acct in snap.values())


def total_positions(snap: Snapshot) -> dict[str, int]:
    totals: dict[str, int] = {}
    for acct in snap.values():
        for symbol, qty in acct.positions.items():
            totals[symbol] = totals.get(symbol, 0) + qty
    return {s: q for s, q in totals.items() if q}
