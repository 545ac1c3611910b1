# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

from copy import copy


class Configurable(object):
    """
    Mixin for objects whose tunable parameters are class-level defaults
    that can be overridden globally or for a single instance.

    Subclasses list their parameter names in config_fields and give each
    one a class attribute holding its default value.
    """

    config_fields = []

    def __init__(self, **kwargs):
        self.config(**kwargs)

    @classmethod
    def config_defaults(cls, **kwargs):
        """
        Set default configuration for all instances of the class.

        Keyword Args:
            Any name in config_fields. Other keywords are left in kwargs
            for the caller to handle.
        """
        for k, v in list(kwargs.items()):
            if k not in cls.config_fields:
                continue
            setattr(cls, k, copy(v))
            kwargs.pop(k)
        return kwargs

    def config(self, **kwargs):
        """
        Set configuration for a particular instance.

        Keyword Args:
            Any name in config_fields. A value of None keeps the default.
        """
        for k, v in kwargs.items():
            if k not in self.config_fields:
                raise TypeError(
                    "{cls} has no configuration field '{k}'.".format(
                        cls=type(self).__name__, k=k
                    )
                )
            if v is None:
                continue
            if isinstance(v, dict):
                setattr(self, k, copy(getattr(self, k, {})))
                getattr(self, k).update(v)
            else:
                setattr(self, k, copy(v))

    def settings(self):
        """Return a dict of the current configuration values."""
        return {k: getattr(self, k) for k in self.config_fields}
