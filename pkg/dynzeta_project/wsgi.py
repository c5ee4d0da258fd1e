"""
WSGI config for dynzeta_project project.

Only used to browse experiment run history through the admin.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'dynzeta_project.settings')

application = get_wsgi_application()
