"""Syscall specification synthesis for kernel drivers and sockets.

The package indexes a C codebase, drives an LLM backend through a staged
analysis of each discovered operation handler, and validates/repairs the
emitted syzlang-subset specifications. A record/replay backend makes every
pipeline run reproducible offline.
"""

__version__ = "0.1.0"
