from django.contrib import admin

from .models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ['id', 'subcommand', 'config_hash', 'status', 'exit_code', 'threads', 'created_at', 'completed_at']
    list_filter = ['status', 'subcommand', 'created_at']
    search_fields = ['config_hash', 'config_path', 'summary', 'error_message']
    readonly_fields = ['config_hash', 'created_at', 'started_at', 'completed_at', 'celery_task_id']

    fieldsets = (
        (None, {
            'fields': ('subcommand', 'status', 'exit_code', 'summary')
        }),
        ('Config', {
            'fields': ('config_path', 'config_hash', 'config', 'threads', 'out')
        }),
        ('Results', {
            'fields': ('output_paths', 'error_message')
        }),
        ('Metadata', {
            'fields': ('celery_task_id', 'created_at', 'started_at', 'completed_at'),
            'classes': ('collapse',)
        }),
    )
