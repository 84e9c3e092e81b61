from config import SOLVER_CONFIG
from shared.schemas import Scheme, SolverConfig

TIGHT_ITERS = 200_000


def tight_config(norm_estimate: float, scheme: Scheme = Scheme.TAU_FIRST, epsilon: float = 1e-10,
                 postprocess: bool = False) -> SolverConfig:
    """Сходимость до малого относительного изменения, без критерия носителя"""
    return SolverConfig(
        alpha=SOLVER_CONFIG["alpha_factor"] * norm_estimate ** 2,
        epsilon=epsilon,
        eta=TIGHT_ITERS,
        max_iters=TIGHT_ITERS,
        scheme=scheme,
        postprocess=postprocess,
    )
