"""QAOA statevector toolkit with a learned recurrent meta-optimizer and
classical baselines, benchmarked on Max-Cut and Sherrington-Kirkpatrick
instances against exact brute-force oracles."""

from .baselines import make_optimizer, nelder_mead, run_optimizer, step
from .cells import (
    CellState,
    LstmWeights,
    QlstmWeights,
    load_weights,
    lstm_cell_forward,
    normalize_cost,
    propose_params,
    qlstm_cell_forward,
    save_weights,
)
from .exceptions import CapacityError, ConfigError, DivergenceError
from .meta import (
    MetaConfig,
    evaluate_transfer,
    meta_loss,
    meta_train,
    unroll_episode,
)
from .problems import (
    Graph,
    IsingInstance,
    OracleResult,
    approx_ratio,
    brute_force_optimum,
    gen_erdos_renyi,
    gen_sk_instance,
    generate_instance,
    ising_energy,
    load_instance,
    maxcut_to_ising,
    save_instance,
)
from .qaoa import (
    QaoaParams,
    build_qaoa_state,
    qaoa_cost,
    qaoa_cost_sampled,
    qaoa_gradient_adjoint,
    qaoa_gradient_paramshift,
)
from .simulator import (
    Circuit,
    Gate,
    StateVector,
    adjoint_gradient,
    apply_gate,
    expectation_z,
    expectation_zz,
    init_plus_state,
    sample_bitstrings,
)
from .trajectory import Trajectory
from .vqc import VqcConfig, VqcParams, vqc_backward, vqc_forward

__version__ = "0.1.0"
