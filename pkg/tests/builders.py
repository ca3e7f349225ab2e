"""Shared fixture builders for the test suite.

Plans here are constructed two ways on purpose: directly as dataclasses
(for unit tests of downstream code) and as raw JSON documents (for parser
tests), so the two paths can be checked against each other.
"""

from __future__ import annotations

from cost2time.plan import PlanNode, PlanSample


def node(kind, cost, rows, time_ms=None, loops=None, startup=0.0, children=()):
    return PlanNode(
        kind=kind,
        startup_cost=startup,
        total_cost=cost,
        plan_rows=rows,
        actual_total_time_ms=time_ms,
        actual_loops=loops,
        children=tuple(children),
    )


def timed_sample(query_id, root, exec_time_ms, template_id=None):
    return PlanSample(
        query_id=query_id,
        root=root,
        template_id=template_id,
        execution_time_ms=exec_time_ms,
    )


def node_doc(kind, cost, rows, time_ms=None, loops=None, startup=0.0, children=None):
    doc = {
        "Node Type": kind,
        "Startup Cost": startup,
        "Total Cost": cost,
        "Plan Rows": rows,
    }
    if time_ms is not None:
        doc["Actual Total Time"] = time_ms
        doc["Actual Loops"] = 1 if loops is None else loops
    if children:
        doc["Plans"] = list(children)
    return doc


def sample_doc(query_id, plan, exec_time_ms=None, template_id=None):
    return {
        "query_id": query_id,
        "template_id": template_id,
        "execution_time_ms": exec_time_ms,
        "plan": plan,
    }


def deep_join_document():
    """A realistic analytics plan: a linear pipeline over a bushy join.

    Limit over Sort over Aggregate over a nested-loop join whose outer side
    is itself a nested loop (sequential scan joined to a bitmap heap scan)
    and whose inner side is an index scan.
    """
    plan = node_doc(
        "Limit", 133700.5, 20,
        children=[node_doc(
            "Sort", 133700.0, 20,
            children=[node_doc(
                "Aggregate", 133600.0, 20,
                children=[node_doc(
                    "Nested Loop", 133500.0, 20,
                    children=[
                        node_doc(
                            "Nested Loop", 133000.0, 61613,
                            children=[
                                node_doc("Seq Scan", 400.0, 1),
                                node_doc("Bitmap Heap Scan", 120000.0, 61613),
                            ],
                        ),
                        node_doc("Index Scan", 8.5, 1),
                    ],
                )],
            )],
        )],
    )
    return sample_doc("q-join-deep", plan, exec_time_ms=None, template_id="T-join")


# Flattened view of deep_join_document: kind -> (instance count, summed
# cardinality estimate). The two nested loops collapse into one entry.
DEEP_JOIN_FLATTENED = {
    "limit": (1, 20.0),
    "sort": (1, 20.0),
    "aggregate": (1, 20.0),
    "nested_loop": (2, 61633.0),
    "index_scan": (1, 1.0),
    "seq_scan": (1, 1.0),
    "bitmap_heap_scan": (1, 61613.0),
}

DEEP_JOIN_PLAN_COST = 133700.5


def scan_only_sample(i, cost):
    """Single seq_scan plan whose runtime is exactly 2x its cost."""
    root = node("seq_scan", cost, rows=cost * 10.0, time_ms=2.0 * cost)
    return timed_sample(f"scan-{i:03d}", root, 2.0 * cost, template_id="T-scan")


def sort_scan_sample(i, scan_cost, sort_extra):
    """sort over seq_scan; scan runs at 2x cost, the sort stage at 3x.

    Inclusive node times are built so the exclusive decomposition recovers
    exactly (scan_cost, 2*scan_cost) and (sort_extra, 3*sort_extra).
    """
    scan_time = 2.0 * scan_cost
    sort_time = scan_time + 3.0 * sort_extra
    child = node("seq_scan", scan_cost, rows=scan_cost * 10.0, time_ms=scan_time)
    root = node(
        "sort",
        scan_cost + sort_extra,
        rows=scan_cost * 10.0,
        time_ms=sort_time,
        children=[child],
    )
    return timed_sample(f"sortscan-{i:03d}", root, sort_time, template_id="T-sortscan")


def two_kind_linear_corpus():
    """Samples whose operator kinds follow exact, distinct linear time laws.

    seq_scan exclusive time is 2x exclusive cost; sort exclusive time is 3x.
    A plan-cost-only model cannot fit both groups at once; a per-kind model
    recovers each law exactly.
    """
    samples = []
    for i, cost in enumerate([40.0, 55.0, 70.0, 85.0, 100.0, 130.0, 160.0]):
        samples.append(scan_only_sample(i, cost))
    pairs = [(30.0, 20.0), (45.0, 26.0), (60.0, 33.0), (80.0, 41.0),
             (95.0, 52.0), (120.0, 64.0), (150.0, 77.0)]
    for i, (scan_cost, sort_extra) in enumerate(pairs):
        samples.append(sort_scan_sample(i, scan_cost, sort_extra))
    return samples


def power_law_operator_corpus():
    """Operator corpus where each kind obeys its own power law.

    seq_scan: time = 0.5 * cost^1.2; hash_join: time = 0.2 * cost^1.5.
    """
    samples = []
    for i, cost in enumerate([20.0, 35.0, 50.0, 75.0, 110.0, 160.0, 230.0]):
        t = 0.5 * cost ** 1.2
        root = node("seq_scan", cost, rows=cost, time_ms=t)
        samples.append(timed_sample(f"pscan-{i:03d}", root, t, template_id="T-ps"))
    for i, (scan_cost, join_extra) in enumerate(
        [(25.0, 18.0), (40.0, 27.0), (60.0, 39.0), (85.0, 55.0),
         (115.0, 74.0), (155.0, 98.0), (205.0, 130.0)]
    ):
        scan_t = 0.5 * scan_cost ** 1.2
        join_t = 0.2 * join_extra ** 1.5
        child = node("seq_scan", scan_cost, rows=scan_cost, time_ms=scan_t)
        root = node(
            "hash_join",
            scan_cost + join_extra,
            rows=scan_cost,
            time_ms=scan_t + join_t,
            children=[child],
        )
        samples.append(
            timed_sample(f"pjoin-{i:03d}", root, scan_t + join_t, template_id="T-pj")
        )
    return samples
