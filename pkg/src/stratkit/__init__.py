"""Strategic term rewriting over many-sorted signatures, with static
analyses for fallibility, case reachability, and termination."""

from .errors import (
    EngineError,
    KindError,
    LoadError,
    ParseError,
    SignatureError,
    StratkitError,
    TermError,
)
from .terms import (
    Lit,
    Node,
    Pattern,
    PLit,
    PNode,
    PVar,
    Signature,
    Symbol,
    Term,
    count,
    depth,
    instantiate,
    is_constant,
    match,
    pattern_vars,
    sort_of,
    subterms,
    term_eq,
    validate_term,
)
from .files import (
    load_signature,
    load_term,
    parse_signature,
    parse_term,
    term_to_sexpr,
)
from .strategies import (
    FAIL,
    ID,
    Adhoc,
    All,
    BogusSchemeWarning,
    Choice,
    Fail,
    Id,
    One,
    Rec,
    Rule,
    RuleChoice,
    RuleDef,
    RuleRef,
    RuleSeq,
    Seq,
    Strategy,
    Var,
    apply_rule,
    family,
    free_vars,
    full_bu,
    full_bu1,
    full_td,
    full_td1,
    innermost,
    innermost1,
    once_bu,
    once_bu1,
    once_td,
    once_td1,
    print_strategy,
    repeat,
    rule_choice,
    rule_seq,
    stop_bu,
    stop_td,
    stop_td1,
    substitute,
    try_,
)
from .interp import (
    DEFAULT_FUEL,
    CompiledStrategy,
    Failure,
    FuelExhausted,
    Outcome,
    Success,
    evaluate,
)
from .queries import (
    MONOIDS,
    NO_RESULT,
    UNIT,
    AdhocQ,
    AllQ,
    BothQ,
    ChoiceQ,
    ConstQ,
    FailQ,
    FullCl,
    MonoidSpec,
    OnceCl,
    QueryExpr,
    QueryRule,
    StopCl,
    check_query_kinds,
    get_monoid,
    run_query,
)
from .fallibility import Sf, fix_eq, scan_dead_choices, sf_analyse, sf_choice, sf_seq, sf_type_of
from .reachability import ReachMap, dead_case_report, mentioned_cases, reach_analyse, reach_transform
from .termination import (
    CountComponent,
    DEPTH_MEASURE,
    DepthComponent,
    Measure,
    Rel,
    RelVec,
    leqs,
    parse_measure,
    rule_effect,
    rule_effect_check,
    term_analyse,
    term_type_of,
    verify_annotations,
)
from .laws import (
    LAWS,
    NONLAWS,
    GenConfig,
    builtin_rules,
    builtin_signature,
    check_laws,
    check_scheme_properties,
    check_soundness,
    find_nonlaw_counterexamples,
    gen_strategy,
    gen_term,
)
from .dsl import (
    Def,
    Program,
    QueryProgram,
    load_program,
    load_query_program,
    parse_program,
    parse_query_program,
)

__version__ = "0.1.0"
