import asyncio
from collections.abc import Callable
from typing import Any, TypeVar

T = TypeVar('T')


async def gather_with_concurrency(
    max_concurrent: int,
    jobs: list[Callable[[], T]]
) -> list[T | BaseException]:
    """Run blocking jobs in worker threads with limited concurrency.

    Results come back in job order; a failing job yields its exception
    in place of a result instead of cancelling the others.
    """
    if max_concurrent < 1:
        raise ValueError("max_concurrent must be at least 1")

    semaphore = asyncio.Semaphore(max_concurrent)

    async def bounded_job(job: Callable[[], Any]):
        async with semaphore:
            return await asyncio.to_thread(job)

    return await asyncio.gather(
        *(bounded_job(job) for job in jobs),
        return_exceptions=True
    )
