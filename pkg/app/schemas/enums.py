from enum import Enum


class WsrMode(str, Enum):
    auto = "auto"
    exact = "exact"
    normal = "normal"


class Tail(str, Enum):
    two_sided = "two-sided"
    greater = "greater"
    less = "less"


class MethodTag(str, Enum):
    wsr_exact = "wsr-exact"
    wsr_normal = "wsr-normal"
    ht2 = "ht2"
    mt_bonferroni = "mt-bonferroni"
    mwsr = "mwsr"


class UniTest(str, Enum):
    wsr = "wsr"
    ttest = "t-test"


class DegeneratePolicy(str, Enum):
    drop = "drop"
    abort = "abort"


class OutputFormat(str, Enum):
    json = "json"
    text = "text"


class CliMethod(str, Enum):
    mwsr = "mwsr"
    ht2 = "ht2"
    mt = "mt"
    wsr = "wsr"


class BenchMethod(str, Enum):
    mwsr = "mwsr"
    mwsr_raw = "mwsr-raw"
    mt_wsr = "mt-wsr"
    mt_ttest = "mt-ttest"
    ht2 = "ht2"
