"""Render pipeline artifacts into figures and delimited summaries.

Produces a node-link drawing of the ontology tree, a heatmap of the
relation matrix, a bar chart of aspect vote means, and a CSV summary of
the tree, all written next to each other in the report directory.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import aspects as aspects_mod
from .config import PipelineConfig
from .ontology import OntologyTree, read_tree

logger = logging.getLogger(__name__)


def _tree_positions(tree: OntologyTree) -> dict[str, tuple[float, float]]:
    """Leaves get consecutive x slots; parents center over their children."""
    pos: dict[str, tuple[float, float]] = {}
    next_x = [0.0]

    def place(sid: str, depth: int) -> float:
        kids = tree.children(sid)
        if not kids:
            x = next_x[0]
            next_x[0] += 1.0
        else:
            xs = [place(k, depth + 1) for k in kids]
            x = sum(xs) / len(xs)
        pos[sid] = (x, -float(depth))
        return x

    place(tree.root_id, 0)
    return pos


def _node_text(tree: OntologyTree, sid: str) -> str:
    terms = tree.synset(sid).terms
    label = tree.label(sid)
    rest = len(terms) - 1
    return label if rest == 0 else f"{label} (+{rest})"


def render_tree_figure(tree: OntologyTree, path: Path) -> None:
    pos = _tree_positions(tree)
    n_leaves = max(1, sum(1 for s in tree.synsets if not tree.children(s.id)))
    depth = max(1, -min(int(y) for _, y in pos.values()))
    fig, ax = plt.subplots(figsize=(max(6.0, 1.5 * n_leaves), 2.0 + 1.4 * depth))
    for sid, parent in tree.parent.items():
        if parent is None:
            continue
        x0, y0 = pos[parent]
        x1, y1 = pos[sid]
        ax.plot([x0, x1], [y0, y1], color="#888888", linewidth=1.2, zorder=1)
    for sid, (x, y) in pos.items():
        is_root = tree.parent[sid] is None
        ax.scatter([x], [y], s=60, color="#2b6cb0" if is_root else "#4a5568", zorder=2)
        ax.annotate(
            _node_text(tree, sid),
            (x, y),
            textcoords="offset points",
            xytext=(0, 8),
            ha="center",
            fontsize=9,
            zorder=3,
        )
    ax.set_title(f"Extracted ontology: {tree.product}")
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def load_matrix_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with path.open("r", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = list(csv.reader(lines))
    ids = reader[0][1:]
    values = np.array([[float(x) for x in row[1:]] for row in reader[1:]])
    return ids, values


def render_heatmap(ids: list[str], matrix: np.ndarray, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(1.0 + 0.5 * len(ids), 1.0 + 0.5 * len(ids)))
    im = ax.imshow(matrix, cmap="viridis")
    ax.set_xticks(range(len(ids)), labels=ids, rotation=90, fontsize=7)
    ax.set_yticks(range(len(ids)), labels=ids, fontsize=7)
    ax.set_xlabel("candidate super synset")
    ax.set_ylabel("synset")
    ax.set_title("Relation matrix")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_aspect_bars(stats: list, path: Path, aspect_threshold: float, top: int = 25) -> None:
    shown = stats[:top]
    names = [s.entity for s in shown]
    values = [s.mean_aspect for s in shown]
    colors = ["#2b6cb0" if s.is_aspect else "#a0aec0" for s in shown]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.45 * len(shown)), 4.0))
    ax.bar(range(len(shown)), values, color=colors)
    ax.axhline(aspect_threshold, color="#c53030", linewidth=1.0, linestyle="--")
    ax.set_xticks(range(len(shown)), labels=names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("mean aspect probability")
    ax.set_title(f"Aspect votes (top {len(shown)} entities by vote count)")
    ax.set_ylim(0.0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_tree_csv(tree: OntologyTree, path: Path, stamp: dict | None = None) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        if stamp:
            fh.write("# " + json.dumps(stamp, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["id", "label", "parent_id", "parent_label", "depth", "terms", "count"])
        for s in sorted(tree.synsets, key=lambda s: s.id):
            pid = tree.parent[s.id]
            depth = 0
            cur = pid
            while cur is not None:
                depth += 1
                cur = tree.parent[cur]
            writer.writerow(
                [
                    s.id,
                    tree.label(s.id),
                    pid if pid is not None else "",
                    tree.label(pid) if pid is not None else "",
                    depth,
                    " ".join(s.terms),
                    sum(tree.prominence[s.id].values()),
                ]
            )


def format_method_table(scores: list, kappa: float | None) -> str:
    """Plain-text table of per-method precision / relative recall / F1."""
    header = f"{'method':<18} {'rel':>5} {'true':>5} {'prec':>7} {'recall':>7} {'f1':>7}"
    lines = [header, "-" * len(header)]
    for s in scores:
        rec = "n/a" if s.relative_recall is None else f"{s.relative_recall:.2f}"
        f1v = "n/a" if s.f1 is None else f"{s.f1:.2f}"
        lines.append(
            f"{s.method:<18} {s.n_relations:>5} {s.n_true:>5} "
            f"{s.precision:>7.2f} {rec:>7} {f1v:>7}"
        )
    lines.append("")
    lines.append(
        "inter-annotator agreement (Fleiss kappa): "
        + ("undefined" if kappa is None else f"{kappa:.4f}")
    )
    return "\n".join(lines) + "\n"


def run_report(cfg: PipelineConfig) -> dict:
    """Render figures and CSV from the artifacts in the output directory."""
    from .pipeline import artifact_path, require_artifact

    report_dir = cfg.out_dir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    written = []

    tree = read_tree(require_artifact(cfg, "ontology"))
    render_tree_figure(tree, report_dir / "ontology_tree.png")
    written.append("ontology_tree.png")
    write_tree_csv(tree, report_dir / "ontology_summary.csv", stamp=cfg.stamp("report"))
    written.append("ontology_summary.csv")

    ids, matrix = load_matrix_csv(require_artifact(cfg, "relation_matrix"))
    render_heatmap(ids, matrix, report_dir / "relation_heatmap.png")
    written.append("relation_heatmap.png")

    stats = aspects_mod.read_aspects(require_artifact(cfg, "aspects"))
    render_aspect_bars(stats, report_dir / "aspect_votes.png", cfg.aspect_threshold)
    written.append("aspect_votes.png")

    eval_path = artifact_path(cfg, "ontology").parent / "evaluation.json"
    if eval_path.exists():
        doc = json.loads(eval_path.read_text(encoding="utf-8"))
        methods = [m["method"] for m in doc["methods"]]
        prec = [m["precision"] for m in doc["methods"]]
        rec = [m["relative_recall"] or 0.0 for m in doc["methods"]]
        x = np.arange(len(methods))
        fig, ax = plt.subplots(figsize=(max(5.0, 1.2 * len(methods)), 4.0))
        ax.bar(x - 0.2, prec, width=0.4, label="precision")
        ax.bar(x + 0.2, rec, width=0.4, label="relative recall")
        ax.set_xticks(x, labels=methods, rotation=30, ha="right")
        ax.set_ylabel("%")
        ax.set_title("Judged relation quality by method")
        ax.legend()
        fig.tight_layout()
        fig.savefig(report_dir / "method_scores.png", dpi=150)
        plt.close(fig)
        written.append("method_scores.png")

    logger.info("report: wrote %s to %s", ", ".join(written), report_dir)
    return {"report_dir": str(report_dir), "files": written}
