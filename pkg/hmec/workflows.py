import asyncio
from datetime import timedelta
from typing import Any, Dict, List, Optional

from temporalio import workflow
from temporalio.common import RetryPolicy
from temporalio.exceptions import ApplicationError

with workflow.unsafe.imports_passed_through():
    from .analysis import AnalysisRequest, AnalysisTest, aggregate_rows, order_rows
    from .utilities.errors import HmecError
    from .utilities.reports import ReportRow


@workflow.defn
class AnalysisWorkflow:
    """
    Distributed run of the analysis suite.

    Every corpus entry (sensitivity tests), every known-plaintext attack and
    the grid-wide scans become parallel activities; their rows are merged in
    a fixed order, so the report matches a local run of the same request.

    Queries:
        get_progress: finished / total activities
        get_report: the merged report, None until all activities are done
    """

    def __init__(self) -> None:
        self._total = 0
        self._finished = 0
        self._report: Optional[Dict[str, Any]] = None

        self._default_retry_policy = RetryPolicy(
            initial_interval=timedelta(seconds=1),
            maximum_interval=timedelta(seconds=10),
            backoff_coefficient=2.0,
            maximum_attempts=5,
        )

    async def _tracked(self, name: str, payload: Dict[str, Any], timeout: timedelta):
        result = await workflow.execute_activity(
            name,
            payload,
            start_to_close_timeout=timeout,
            retry_policy=self._default_retry_policy,
        )
        self._finished += 1
        return result

    @workflow.run
    async def run(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        try:
            request = AnalysisRequest.model_validate(payload["request"])
            request.validate_for_run()
        except (KeyError, ValueError) as e:
            error_type = e.error_type if isinstance(e, HmecError) else "AnalysisError"
            raise ApplicationError(f"Invalid analysis request: {e}", type=error_type, non_retryable=True)

        count = len(request.corpus_hex)
        short = timedelta(minutes=10)
        long = timedelta(hours=2)

        row_tasks = []
        if request.wants(AnalysisTest.SENSITIVITY) or request.wants(AnalysisTest.KEYSENS):
            for index in range(count):
                row_tasks.append(self._tracked("analyze_corpus_entry", {**payload, "index": index}, short))
        if request.wants(AnalysisTest.IDENTIFIABILITY):
            row_tasks.append(self._tracked("analyze_identifiability", payload, long))
        if request.wants(AnalysisTest.KEYSPACE):
            row_tasks.append(self._tracked("count_key_space", payload, short))

        attack_tasks = []
        if request.wants(AnalysisTest.KPA):
            for index in range(count):
                attack_tasks.append(self._tracked("attack_corpus_entry", {**payload, "index": index}, long))

        self._total = len(row_tasks) + len(attack_tasks)
        workflow.logger.info(f"Analysis fan-out: {self._total} activities")

        row_results = await asyncio.gather(*row_tasks)
        attack_results = await asyncio.gather(*attack_tasks)

        rows: List[ReportRow] = [ReportRow(**row) for part in row_results for row in part]
        attacks: Dict[str, Any] = {}
        for part in attack_results:
            rows.extend(ReportRow(**row) for row in part["rows"])
            attacks[part["subject"]] = part["result"]

        rows = order_rows(rows + aggregate_rows(rows))
        self._report = {
            "rows": [row.model_dump() for row in rows],
            "attacks": attacks,
        }
        return self._report

    @workflow.query
    def get_progress(self) -> Dict[str, int]:
        return {"finished": self._finished, "total": self._total}

    @workflow.query
    def get_report(self) -> Optional[Dict[str, Any]]:
        return self._report
