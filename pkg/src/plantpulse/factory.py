"""Seeded discrete-event simulator of a fictional engine factory.

Emits the business side of the data: purchase orders feed production orders,
whose positions move across workplaces, each finished order booked against a
sales order. Everything is driven by one `random.Random(seed)`, so a fixed
seed and advance schedule reproduce the exact row stream.
"""

from __future__ import annotations

import enum
import heapq
import random
from dataclasses import dataclass, field

from . import schema
from .schema import (
    Customer,
    Material,
    Product,
    ProductionOrderHead,
    ProductionOrderPosition,
    PurchaseOrderHead,
    PurchaseOrderItem,
    SalesOrderHead,
    SalesOrderItem,
    Supplier,
    Workplace,
)

# Production orders supplied by one purchase order item before a new one is cut.
LOT_SIZE = 10


@dataclass(frozen=True)
class RoutingStep:
    workplace_id: int
    mean_duration_ms: int = 5000
    duration_jitter: float = 0.2


@dataclass
class MasterData:
    suppliers: list[Supplier]
    customers: list[Customer]
    products: list[Product]
    materials: list[Material]
    workplaces: list[Workplace]
    routings: dict[int, list[RoutingStep]]

    def validate(self):
        for name in ("suppliers", "customers", "products", "materials", "workplaces"):
            if not getattr(self, name):
                raise ValueError(f"master data: {name} must not be empty")
        workplace_ids = {w.id for w in self.workplaces}
        for product in self.products:
            steps = self.routings.get(product.id)
            if not steps:
                raise ValueError(f"master data: product {product.id} has no routing")
            for step in steps:
                if step.workplace_id not in workplace_ids:
                    raise ValueError(
                        f"master data: routing references unknown workplace {step.workplace_id}"
                    )
                if step.mean_duration_ms < 1:
                    raise ValueError("master data: step duration must be >= 1 ms")
                if not 0 <= step.duration_jitter < 1:
                    raise ValueError("master data: jitter must be in [0, 1)")

    def material_for(self, product_id: int) -> int:
        """Raw-material binding: products map onto materials round-robin."""
        index = next(
            i for i, p in enumerate(self.products) if p.id == product_id
        )
        return self.materials[index % len(self.materials)].id


def default_master_data() -> MasterData:
    routing = [RoutingStep(1, 5000, 0.2), RoutingStep(2, 5000, 0.2)]
    return MasterData(
        suppliers=[
            Supplier(1, "Steelworks AG"),
            Supplier(2, "Precision Alloys GmbH"),
            Supplier(3, "Nordic Metals Oy"),
        ],
        customers=[Customer(1, "Atlas Motors"), Customer(2, "Borealis Machinery")],
        products=[Product(1, "Engine A"), Product(2, "Engine B")],
        materials=[Material(1, "Steel Billet"), Material(2, "Aluminium Ingot")],
        workplaces=[
            Workplace(1, "Cutting Machine"),
            Workplace(2, "Assembly"),
            Workplace(3, "Milling Machine"),
            Workplace(4, "Quality Check"),
        ],
        routings={1: list(routing), 2: list(routing)},
    )


class EventKind(enum.Enum):
    ORDER_ARRIVAL = "order_arrival"
    POSITION_ENTER = "position_enter"
    POSITION_LEAVE = "position_leave"
    SALES_BOOKING = "sales_booking"


@dataclass
class EmittedBatch:
    """Rows grouped by table plus fill-in updates, in creation order."""

    rows: dict[str, list] = field(default_factory=dict)
    updates: list[tuple] = field(default_factory=list)

    def add(self, table: str, row):
        self.rows.setdefault(table, []).append(row)

    def is_empty(self) -> bool:
        return not self.rows and not self.updates

    def row_count(self) -> int:
        return sum(len(rows) for rows in self.rows.values())


class FactorySim:
    """Event-driven business-row generator on a virtual millisecond clock.

    Single-driver contract: one caller invokes advance_to/start/stop. While
    stopped, advance_to emits nothing and leaves the clock untouched, so a
    later start resumes exactly where generation paused.
    """

    def __init__(self, seed: int, master: MasterData | None = None,
                 arrival_mean_ms: int = 1000):
        if arrival_mean_ms < 1:
            raise ValueError("arrival_mean_ms must be >= 1")
        master = master if master is not None else default_master_data()
        master.validate()
        self.master = master
        self.arrival_mean_ms = arrival_mean_ms
        self.rng = random.Random(seed)
        self.now = 0
        self.running = False
        self._heap: list = []
        self._event_seq = 0
        self._id_next = {t: 1 for t in schema.TABLE_ORDER}
        # material_id -> [purchase_order_item_id, remaining_capacity]
        self._open_lots: dict[int, list[int]] = {}
        self._supplier_rr = 0
        self._schedule(self._draw_interarrival(), EventKind.ORDER_ARRIVAL, None)

    # -- plumbing ------------------------------------------------------------

    def _alloc(self, table: str) -> int:
        value = self._id_next[table]
        self._id_next[table] = value + 1
        return value

    def _schedule(self, due: int, kind: EventKind, payload):
        heapq.heappush(self._heap, (due, self._event_seq, kind, payload))
        self._event_seq += 1

    def _draw_interarrival(self) -> int:
        return max(1, round(self.rng.expovariate(1.0 / self.arrival_mean_ms)))

    def _draw_duration(self, step: RoutingStep) -> int:
        lo = step.mean_duration_ms * (1.0 - step.duration_jitter)
        hi = step.mean_duration_ms * (1.0 + step.duration_jitter)
        return max(1, round(self.rng.uniform(lo, hi)))

    # -- control ---------------------------------------------------------------

    def start(self) -> bool:
        self.running = True
        return self.running

    def stop(self) -> bool:
        self.running = False
        return self.running

    # -- generation --------------------------------------------------------------

    def advance_to(self, t: int) -> EmittedBatch:
        """Process every event due up to and including ``t`` (ties by event id)."""
        if t < self.now:
            raise ValueError(f"cannot advance to {t}: clock is at {self.now}")
        batch = EmittedBatch()
        if not self.running:
            return batch
        heap = self._heap
        while heap and heap[0][0] <= t:
            due, _, kind, payload = heapq.heappop(heap)
            self.now = due
            if kind is EventKind.ORDER_ARRIVAL:
                self._on_arrival(batch)
            elif kind is EventKind.POSITION_ENTER:
                self._on_enter(batch, *payload)
            elif kind is EventKind.POSITION_LEAVE:
                self._on_leave(batch, *payload)
            else:
                self._on_booking(batch, *payload)
        self.now = t
        return batch

    def _on_arrival(self, batch: EmittedBatch):
        product = self.rng.choice(self.master.products)
        material_id = self.master.material_for(product.id)
        lot = self._open_lots.get(material_id)
        if lot is None or lot[1] == 0:
            supplier = self.master.suppliers[self._supplier_rr % len(self.master.suppliers)]
            self._supplier_rr += 1
            po_head = PurchaseOrderHead(
                id=self._alloc("PURCHASE_ORDER_HEAD"),
                supplier_id=supplier.id,
                created_at=self.now,
            )
            po_item = PurchaseOrderItem(
                id=self._alloc("PURCHASE_ORDER_ITEM"),
                head_id=po_head.id,
                material_id=material_id,
                quantity=LOT_SIZE,
            )
            batch.add("PURCHASE_ORDER_HEAD", po_head)
            batch.add("PURCHASE_ORDER_ITEM", po_item)
            lot = self._open_lots[material_id] = [po_item.id, LOT_SIZE]
        lot[1] -= 1

        head = ProductionOrderHead(
            id=self._alloc("PRODUCTION_ORDER_HEAD"),
            product_id=product.id,
            purchase_order_item_id=lot[0],
            sales_order_item_id=None,
            released_at=self.now,
            finished_at=None,
        )
        batch.add("PRODUCTION_ORDER_HEAD", head)
        self._schedule(self.now, EventKind.POSITION_ENTER, (head.id, product.id, 0))
        self._schedule(self.now, EventKind.SALES_BOOKING, (head.id, product.id))
        self._schedule(self.now + self._draw_interarrival(), EventKind.ORDER_ARRIVAL, None)

    def _on_enter(self, batch: EmittedBatch, head_id: int, product_id: int, step_idx: int):
        step = self.master.routings[product_id][step_idx]
        position = ProductionOrderPosition(
            id=self._alloc("PRODUCTION_ORDER_POSITION"),
            head_id=head_id,
            workplace_id=step.workplace_id,
            seq_no=step_idx + 1,
            entered_at=self.now,
            left_at=None,
        )
        batch.add("PRODUCTION_ORDER_POSITION", position)
        due = self.now + self._draw_duration(step)
        self._schedule(
            due, EventKind.POSITION_LEAVE, (head_id, product_id, step_idx, position.id)
        )

    def _on_leave(self, batch: EmittedBatch, head_id: int, product_id: int,
                  step_idx: int, position_id: int):
        batch.updates.append(
            ("PRODUCTION_ORDER_POSITION", position_id, "LEFT_AT", self.now)
        )
        routing = self.master.routings[product_id]
        if step_idx + 1 < len(routing):
            self._schedule(
                self.now, EventKind.POSITION_ENTER, (head_id, product_id, step_idx + 1)
            )
        else:
            batch.updates.append(
                ("PRODUCTION_ORDER_HEAD", head_id, "FINISHED_AT", self.now)
            )

    def _on_booking(self, batch: EmittedBatch, head_id: int, product_id: int):
        customer = self.rng.choice(self.master.customers)
        so_head = SalesOrderHead(
            id=self._alloc("SALES_ORDER_HEAD"),
            customer_id=customer.id,
            created_at=self.now,
        )
        so_item = SalesOrderItem(
            id=self._alloc("SALES_ORDER_ITEM"),
            head_id=so_head.id,
            product_id=product_id,
            quantity=1,
        )
        batch.add("SALES_ORDER_HEAD", so_head)
        batch.add("SALES_ORDER_ITEM", so_item)
        batch.updates.append(
            ("PRODUCTION_ORDER_HEAD", head_id, "SALES_ORDER_ITEM_ID", so_item.id)
        )

    # -- store seeding ---------------------------------------------------------

    def master_batch(self) -> list[tuple[str, list]]:
        m = self.master
        return [
            ("SUPPLIER", list(m.suppliers)),
            ("CUSTOMER", list(m.customers)),
            ("PRODUCT", list(m.products)),
            ("MATERIAL", list(m.materials)),
            ("WORKPLACE", list(m.workplaces)),
        ]
