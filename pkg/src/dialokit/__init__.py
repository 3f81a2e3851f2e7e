"""dialokit: unify heterogeneous dialogue datasets into one schema,
compile prompted seq2seq corpora for seven dialogue tasks, build
deterministic low-resource splits, score predictions, and run bucketed
fine-grained analysis.
"""

from .schema import (
    BeliefState,
    Dialogue,
    DialogueAct,
    Goal,
    GoalDomain,
    McqaItem,
    NupCandidate,
    OPEN_DOMAIN,
    SchemaError,
    Speaker,
    TASK_ORDER,
    TaskKind,
    Turn,
    dialogue_from_dict,
    dialogue_to_dict,
    dumps_dialogue,
    loads_dialogue,
    validate_dialogue,
)
from .text import normalize_token, normalize_value, tokenize
from .ingest import (
    ADAPTERS,
    AdapterRejection,
    DatasetDescriptor,
    IngestError,
    IngestStats,
    adapt_intent_table,
    adapt_summ_pair,
    adapt_wizard_style,
    ingest_file,
    load_canonical,
    write_canonical,
)
from .prompts import (
    CompileStats,
    PromptError,
    PromptTemplate,
    PromptedExample,
    apply_prompt,
    compile_corpus,
    default_templates,
    derive_task_examples,
    linearize_acts,
    linearize_belief_state,
    load_templates,
    make_example_id,
    parse_belief_state,
    parse_belief_state_with_stats,
    read_compiled,
    split_example_id,
    write_compiled,
)
from .metrics import (
    EntityDb,
    MetricError,
    MetricReport,
    PredictionSet,
    bleu_corpus,
    combined_score,
    inform_success,
    intent_accuracy,
    joint_goal_accuracy,
    rouge_corpus,
    rouge_scores,
)
from .analysis import (
    AnalysisSample,
    AspectProfile,
    BucketSpec,
    assign_bucket,
    compute_aspects,
    default_bucket_specs,
    fine_grained_report,
)
from .splits import (
    SplitError,
    SplitManifest,
    k_per_intent,
    leave_one_domain_out,
    percent_subsample,
)

__version__ = "0.1.0"
