from pathlib import Path

from dynaconf import Dynaconf

settings = Dynaconf(
    root_path=str(Path(__file__).parent),
    envvar_prefix="CHEN_HOLONOMY",
    environments=True,
    settings_files=["settings.toml", ".secrets.toml"],
)

# `envvar_prefix` = export envvars with `export CHEN_HOLONOMY_REPORT_DIR=out`.
# `settings_files` = Load these files in the order.
