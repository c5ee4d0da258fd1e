"""
Celery tasks for running experiments in a worker
"""
import logging

from celery import shared_task

from interval_maps.exceptions import DynZetaError

from .config import parse_config
from .models import ExperimentRun
from .runners import execute, exit_code_for

logger = logging.getLogger(__name__)


@shared_task(bind=True, max_retries=3, default_retry_delay=60)
def run_experiment_async(self, run_id):
    """
    Execute a stored ExperimentRun

    Args:
        run_id: ID of the ExperimentRun

    Returns:
        dict: Status information
    """
    try:
        run = ExperimentRun.objects.get(id=run_id)
    except ExperimentRun.DoesNotExist:
        logger.error(f'ExperimentRun {run_id} not found')
        return {'status': 'error', 'message': 'Run not found'}

    run.mark_running()
    try:
        config = parse_config(run.config)
        outcome = execute(config, run.subcommand, threads=run.threads, out=run.out or None)
    except DynZetaError as e:
        logger.error(f'Experiment run {run_id} ({run.subcommand}) failed: {e}')
        run.mark_failed(str(e), exit_code=exit_code_for(e))
        return {'status': 'error', 'run_id': run_id, 'exit_code': run.exit_code, 'error': str(e)}
    except Exception as e:
        logger.error(f'Unexpected error in experiment run {run_id}: {str(e)}')
        if self.request.retries < self.max_retries:
            raise self.retry(exc=e)
        run.mark_failed(str(e))
        return {'status': 'error', 'run_id': run_id, 'error': str(e)}

    run.mark_done(outcome, outcome.exit_code)
    logger.info(f'Experiment run {run_id} finished: {outcome.summary}')
    return {
        'status': 'success' if outcome.exit_code == 0 else 'failed',
        'run_id': run_id,
        'summary': outcome.summary,
        'output_paths': outcome.paths,
    }
