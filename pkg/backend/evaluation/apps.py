from django.apps import AppConfig


class EvaluationAppConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "evaluation"
    verbose_name = "Policy evaluation"
