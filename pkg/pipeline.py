"""
Case-study pipeline orchestrator.
Runs enumerate -> stratify -> check cell complex -> core -> weak reduce -> homology
for the (1,0,2,0) annulus component and collects a RunReport.
"""

import time
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

from complex import homology, order_complex
from export import ResultWriter
from flows import ANNULUS, build_stratified_poset, class_ids, degeneracy_profile, enumerate_component
from poset import StratifiedPoset, check_cell_complex
from reduction import core, weak_reduce
from utils import format_duration

logger = logging.getLogger(__name__)

# Reference numbers for the annulus component
EXPECTED_STRATA = {0: 3, 1: 8, 2: 12, 3: 6}
EXPECTED_CORE = 12
EXPECTED_WEAK = 8
EXPECTED_BETTI = [1, 0, 2]


@dataclass
class RunReport:
    """Per-stage summary of one command run."""

    command: str
    inputs: Dict[str, str] = field(default_factory=dict)
    strata: Dict[int, int] = field(default_factory=dict)
    splits: Dict[int, Dict[str, int]] = field(default_factory=dict)
    core_size: Optional[int] = None
    weak_size: Optional[int] = None
    betti: List[int] = field(default_factory=list)
    betti_full: List[int] = field(default_factory=list)
    torsion_free: bool = True
    cell_complex: bool = False
    graded: bool = False
    wall_time: float = 0.0

    def summary_lines(self) -> List[str]:
        """Acceptance summary, one fact per line."""
        lines = [f"strata: {' '.join(str(self.strata.get(q, 0)) for q in sorted(self.strata))}"]
        for q in sorted(self.splits):
            parts = ' '.join(f"{label}={n}" for label, n in sorted(self.splits[q].items()))
            lines.append(f"codim {q}: {parts}")
        lines.append(f"cell_complex: {'pass' if self.cell_complex else 'fail'}")
        lines.append(f"graded: {'yes' if self.graded else 'no'}")
        lines.append(f"core: {self.core_size}")
        lines.append(f"weak_min: {self.weak_size}")
        lines.append(f"H: {' '.join(str(b) for b in self.betti)}")
        lines.append(f"H_full: {' '.join(str(b) for b in self.betti_full)}")
        return lines

    def to_dict(self) -> dict:
        return asdict(self)


def acceptance_mismatches(report: RunReport) -> List[str]:
    """Differences between a case-study report and the reference numbers."""
    problems = []
    if report.strata != EXPECTED_STRATA:
        problems.append(f"strata {report.strata} != {EXPECTED_STRATA}")
    if not report.cell_complex:
        problems.append("cell complex check failed")
    if not report.graded:
        problems.append("poset is not graded by codimension")
    if report.core_size != EXPECTED_CORE:
        problems.append(f"core size {report.core_size} != {EXPECTED_CORE}")
    if report.weak_size != EXPECTED_WEAK:
        problems.append(f"weak reduction size {report.weak_size} != {EXPECTED_WEAK}")
    if report.betti != EXPECTED_BETTI or report.betti_full != EXPECTED_BETTI:
        problems.append(f"betti {report.betti} / {report.betti_full} != {EXPECTED_BETTI}")
    if not report.torsion_free:
        problems.append("homology has torsion")
    return problems


class CaseStudyPipeline:
    """Main case-study orchestrator."""

    def __init__(self, out_dir: Optional[str] = None):
        """Initialize; results are written only when out_dir is given."""
        self.writer = ResultWriter(out_dir) if out_dir else None
        self.component: Optional[StratifiedPoset] = None
        logger.info("Case-study pipeline initialized for the annulus component")

    def run(self) -> Optional[RunReport]:
        """Execute every stage; returns None if a stage fails."""
        try:
            logger.info("=" * 60)
            logger.info("STARTING CASE STUDY: ANNULUS COMPONENT (1,0,2,0)")
            logger.info("=" * 60)

            start_time = time.perf_counter()
            report = RunReport(command='case-study')

            logger.info("Step 1: ENUMERATING flow classes up to codimension 3")
            classes = enumerate_component(ANNULUS)
            report.strata = {q: len(v) for q, v in classes.items()}
            for q, diagrams in classes.items():
                counts: Dict[str, int] = {}
                for d in diagrams:
                    label = degeneracy_profile(d)
                    counts[label] = counts.get(label, 0) + 1
                report.splits[q] = counts

            logger.info("Step 2: STRATIFYING classes by resolution moves")
            component = build_stratified_poset(classes)
            self.component = component

            logger.info("Step 3: CHECKING cell complex laws")
            check = check_cell_complex(component)
            report.cell_complex = check.passed
            report.graded = check.graded

            logger.info("Step 4: REDUCING to the core")
            reduced, _ = core(component.poset)
            report.core_size = len(reduced)

            logger.info("Step 5: WEAK REDUCTION")
            weak, trace = weak_reduce(component.poset)
            report.weak_size = len(weak)
            for x, kind in trace.steps:
                logger.debug(f"  removed {x} {kind}")

            logger.info("Step 6: HOMOLOGY of the order complexes")
            small = homology(order_complex(weak))
            full = homology(order_complex(component.poset))
            report.betti = small.betti
            report.betti_full = full.betti
            report.torsion_free = small.torsion_free and full.torsion_free

            report.wall_time = round(time.perf_counter() - start_time, 3)

            if self.writer:
                self.writer.save_poset(component)
                self.writer.save_dot(component)
                named = class_ids(classes)
                self.writer.save_diagrams(named)
                self.writer.save_class_table(named)
                self.writer.log_run(report.to_dict(), success=True)

            logger.info("=" * 60)
            logger.info("CASE STUDY COMPLETED")
            logger.info(f"Duration: {format_duration(report.wall_time)}")
            logger.info("=" * 60)
            return report

        except Exception as e:
            logger.error(f"Case study failed with error: {e}")
            if self.writer:
                self.writer.log_run({}, success=False, error_msg=str(e))
            return None
