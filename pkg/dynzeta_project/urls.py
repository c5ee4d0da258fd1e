"""
URL configuration for dynzeta_project project.

The only web surface is the admin, where experiment runs can be inspected.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
