"""agendaminer: classify policy documents against analyst-defined agenda
queries with skip-gram word embeddings, tf-idf paragraph composition, and
cosine-threshold retrieval."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    CleaningRules,
    Document,
    Paragraph,
    ParagraphRecord,
    clean,
    correct_spelling,
    ingest,
    segment,
    tokenize,
)
from .errors import (  # noqa: F401
    AgendaMinerError,
    ConfigError,
    ConflictError,
    IngestError,
    ParseError,
    ValidationError,
)
from .phraser import PhraseTable, learn_phrases  # noqa: F401
from .retrieval import (  # noqa: F401
    AgendaQuery,
    DocLabel,
    RetrievalHit,
    classify_documents,
    cosine,
    descend_threshold,
    nearest_words,
    retrieve,
)
from .skipgram import EmbeddingMatrix, TrainConfig, Vocabulary, build_vocab, train  # noqa: F401
from .vectorizer import (  # noqa: F401
    ParagraphVector,
    ParagraphVectorStore,
    TfidfStats,
    embed_paragraph,
    embed_query,
    fit_tfidf,
)
