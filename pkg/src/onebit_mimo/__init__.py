"""Link-level simulator and learning-based detectors for uplink multi-user
MIMO with one-bit ADCs: a pilot-trained supervised detector, its
semi-supervised EM refinement over unlabeled slots, a genie ML baseline,
and a reproducible Monte Carlo BER harness."""

from .channel import (
    BinaryObservation,
    Constellation,
    build_psk_constellation,
    draw_rayleigh_channel,
    modulate,
    modulate_all_classes,
    realify,
    transmit_and_quantize,
    transmit_block,
    true_code_and_epsilons,
)
from .detectors import (
    LabeledSet,
    ModelParams,
    class_to_messages,
    log_likelihood_class,
    log_likelihood_matrix,
    ml_detect,
    ml_detect_batch,
    mld_csir,
    sl_estimate,
)
from .harness import (
    BerRecord,
    ExperimentConfig,
    read_results,
    run_coherence_block,
    run_experiment,
    sweep_pilot_lengths,
    write_results,
)
from .numerics import (
    ConfigurationError,
    RngStream,
    log_sum_exp,
    m_ary_compress,
    m_ary_expand,
    q_tail,
    sample_gaussian,
    sign_quantize,
)
from .ssl_em import (
    EmConfig,
    EmTrace,
    ObservedData,
    Responsibilities,
    data_log_likelihood,
    e_step,
    m_step,
    run_em,
    ssl_detect_window,
)

__version__ = "0.1.0"
