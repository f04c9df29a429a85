from django.apps import AppConfig


class CohortAppConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "cohort"
    verbose_name = "Synthetic cohort simulator"
