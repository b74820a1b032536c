"""The built-in sTeX handlers and the default registry."""

from flexitex.handlers.definition import DefinitionHandler
from flexitex.handlers.importmodule import ImportModuleHandler
from flexitex.handlers.module import ModuleHandler
from flexitex.handlers.symdef import SymdefHandler
from flexitex.registry import Registry


def builtin_handlers():
    return [ModuleHandler(), ImportModuleHandler(), SymdefHandler(), DefinitionHandler()]


def default_registry() -> Registry:
    return Registry(builtin_handlers())


__all__ = [
    "DefinitionHandler",
    "ImportModuleHandler",
    "ModuleHandler",
    "SymdefHandler",
    "builtin_handlers",
    "default_registry",
]
