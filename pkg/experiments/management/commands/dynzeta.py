"""
Django management command running dynzeta experiments from a JSON config
Usage: python manage.py dynzeta spectrum --config configs/gauss.json [--out results/gauss] [--threads 4]
"""
import logging

from django.core.management.base import BaseCommand, CommandError

from experiments.config import ConfigError, load_config
from experiments.models import ExperimentRun
from experiments.runners import EXIT_CONFIG, SUBCOMMANDS, run_safely

logger = logging.getLogger(__name__)

APP_LOGGERS = (
    'interval_maps', 'induced_map', 'periodic_orbits', 'zeta_traces', 'spectral', 'continuation', 'experiments',
)


class Command(BaseCommand):
    help = 'Run a dynzeta subcommand (map-info, trace, det, zeta, spectrum, continue, check, ...) on a config'

    def add_arguments(self, parser):
        parser.add_argument('subcommand', choices=SUBCOMMANDS, help='Computation to run')
        parser.add_argument('--config', required=True, help='Path to the JSON experiment config')
        parser.add_argument('--out', help='Base path for result files (overrides output.path)')
        parser.add_argument('--threads', type=int, default=1, help='Worker threads for word sums (default: 1)')
        parser.add_argument('--verbose', action='store_true', help='Debug logging for the dynzeta apps')
        parser.add_argument('--async', action='store_true', dest='run_async',
                            help='Queue the run on the Celery worker instead of running it here')
        parser.add_argument('--no-record', action='store_true', help='Do not store an ExperimentRun')

    def handle(self, *args, **options):
        subcommand = options['subcommand']
        if options['verbose']:
            for name in APP_LOGGERS:
                logging.getLogger(name).setLevel(logging.DEBUG)
        if options['threads'] < 1:
            self._fail(f'--threads must be at least 1, got {options["threads"]}', EXIT_CONFIG)

        try:
            config = load_config(options['config'])
        except ConfigError as e:
            self._fail(f'Config error: {e}', EXIT_CONFIG)

        run = None
        if not options['no_record'] or options['run_async']:
            run = ExperimentRun.objects.create(
                subcommand=subcommand, config=config.raw, config_hash=config.hash,
                config_path=str(options['config']), out=options['out'] or '', threads=options['threads'],
            )

        if options['run_async']:
            from experiments.tasks import run_experiment_async
            task = run_experiment_async.delay(run.id)
            run.celery_task_id = task.id
            run.save(update_fields=['celery_task_id'])
            self.stdout.write(self.style.SUCCESS(f'📤 Queued run #{run.id} ({subcommand}) as task {task.id}'))
            return

        self.stdout.write(f'🔢 {subcommand} on {options["config"]} (hash {config.hash})')
        if run:
            run.mark_running()
        outcome, code, message = run_safely(config, subcommand, options['threads'], options['out'])

        if outcome is None:
            if run:
                run.mark_failed(message, exit_code=code)
            self._fail(message, code)

        for line in outcome.lines:
            self.stdout.write(f'   {line}')
        for path in outcome.paths:
            self.stdout.write(f'   📄 {path}')
        if run:
            run.mark_done(outcome, code)

        if code != 0:
            self.stdout.write(self.style.ERROR(f'❌ {outcome.summary}'))
            raise CommandError(outcome.summary, returncode=code)
        self.stdout.write(self.style.SUCCESS(f'✅ {outcome.summary}'))

    def _fail(self, message, code):
        self.stderr.write(self.style.ERROR(f'❌ {message}'))
        raise CommandError(message, returncode=code)
