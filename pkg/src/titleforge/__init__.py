"""Question title generation for Stack Overflow posts.

Pipeline: mine Posts.xml dumps into per-language quadruplet corpora, tune a
pretrained encoder-decoder with hybrid prompts and multi-task language
prefixes, generate titles with beam search, and score them with ROUGE-L,
BLEU, METEOR, and CIDEr.
"""

__version__ = "0.1.0"
