"""Surface-language frontend: tokens, AST, parser, pretty-printer."""
