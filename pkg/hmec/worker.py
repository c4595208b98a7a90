import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor

from temporalio import worker

from .activities import ACTIVITIES
from .utilities import get_settings, get_temporal_client
from .workflows import AnalysisWorkflow

logger = logging.getLogger(__name__)


async def run_worker() -> None:
    settings = get_settings()
    temporal_client = await get_temporal_client(settings)

    # sync activities need an executor; one thread per configured worker
    with ThreadPoolExecutor(max_workers=settings.workers) as executor:
        w = worker.Worker(
            temporal_client,
            task_queue=settings.task_queue,
            workflows=[AnalysisWorkflow],
            activities=ACTIVITIES,
            activity_executor=executor,
            max_concurrent_activities=settings.workers,
        )
        logger.info("Worker started, polling task queue: %s", settings.task_queue)
        await w.run()


def main() -> None:
    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        asyncio.run(run_worker())
    except KeyboardInterrupt:
        logger.info("Worker stopped by user")


if __name__ == "__main__":
    main()
