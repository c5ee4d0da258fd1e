from django.db import models
from django.utils import timezone


class ExperimentRun(models.Model):
    """One execution of a dynzeta subcommand on a config"""
    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('running', 'Running'),
        ('done', 'Done'),
        ('failed', 'Failed'),
    ]

    subcommand = models.CharField(max_length=20)
    config = models.JSONField()
    config_hash = models.CharField(max_length=16, db_index=True)
    config_path = models.CharField(max_length=500, blank=True)
    out = models.CharField(max_length=500, blank=True, help_text='Base path overriding output.path')
    threads = models.PositiveIntegerField(default=1)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='pending')
    exit_code = models.IntegerField(blank=True, null=True)
    output_paths = models.JSONField(default=list, blank=True)
    summary = models.TextField(blank=True)
    error_message = models.TextField(blank=True, null=True)
    celery_task_id = models.CharField(max_length=255, blank=True, null=True)

    created_at = models.DateTimeField(auto_now_add=True)
    started_at = models.DateTimeField(blank=True, null=True)
    completed_at = models.DateTimeField(blank=True, null=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f'{self.subcommand} [{self.config_hash}] - {self.status}'

    @property
    def duration(self):
        if self.started_at and self.completed_at:
            return (self.completed_at - self.started_at).total_seconds()
        return None

    def mark_running(self):
        self.status = 'running'
        self.started_at = timezone.now()
        self.save(update_fields=['status', 'started_at'])

    def mark_done(self, outcome, exit_code=0):
        self.status = 'done' if exit_code == 0 else 'failed'
        self.exit_code = exit_code
        self.summary = outcome.summary
        self.output_paths = list(outcome.paths)
        if exit_code != 0:
            self.error_message = outcome.summary
        self.completed_at = timezone.now()
        self.save()

    def mark_failed(self, message, exit_code=1):
        self.status = 'failed'
        self.exit_code = exit_code
        self.error_message = message
        self.completed_at = timezone.now()
        self.save()
