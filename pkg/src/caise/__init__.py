"""caise: conversational image search and editing.

Parses and executes bracketed image commands against a local searchable
corpus, and trains a sequence model that proposes the next command from the
running dialogue, the current image, and the command history.
"""

__version__ = "0.1.0"
