# Generated by Django 5.2.5 on 2026-10-19 10:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('subcommand', models.CharField(max_length=20)),
                ('config', models.JSONField()),
                ('config_hash', models.CharField(db_index=True, max_length=16)),
                ('config_path', models.CharField(blank=True, max_length=500)),
                ('out', models.CharField(blank=True, help_text='Base path overriding output.path', max_length=500)),
                ('threads', models.PositiveIntegerField(default=1)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('running', 'Running'), ('done', 'Done'), ('failed', 'Failed')], default='pending', max_length=20)),
                ('exit_code', models.IntegerField(blank=True, null=True)),
                ('output_paths', models.JSONField(blank=True, default=list)),
                ('summary', models.TextField(blank=True)),
                ('error_message', models.TextField(blank=True, null=True)),
                ('celery_task_id', models.CharField(blank=True, max_length=255, null=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('started_at', models.DateTimeField(blank=True, null=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
