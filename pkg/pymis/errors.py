"""
Module to store the pymis exceptions.

Every exception carries a machine readable `code` and the pipeline `stage`
where it was raised, so the command line can report them and choose the
exit status.

Classes:
    PymisError: Base class of all the program exceptions.
    ConfigError: Invalid configuration or missing input.
    BudgetExceeded: An exact oracle was asked to work beyond its budget.
    CertificationFailure: A verification check failed.
    DegenerateDrawing: Drawing not in general position.
    GadgetOverlap: Two crossings can't be replaced independently.
    ThresholdViolation: Threshold J bigger than a coupling magnitude.
    SignViolation: Coupling that should be antiferromagnetic isn't.
    GaugeViolation: Cluster model breaks the gauge inequalities.
    TreeViolation: Cluster coupling graph is not a connected tree.
    InterClusterSignConflict: Propagated gauge makes an inter link
        ferromagnetic.
    EmbeddingOverflow: Embedding invariant broken.
    AlreadyDeleted: Site deleted twice.
    PatternMismatch: Layout doesn't fit the lattice pattern.
    PatchTooLarge: Certification patch beyond the oracle budget.
    RoutingFailed: No defect free path for a link.
    ConvergenceFailure: Eigensolver didn't converge.
    StepTooLarge: Time evolution lost unitarity.
    MissingArtifact: Report input not found.
"""

EXIT_PASS = 0
EXIT_CERTIFICATION = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_STAGE = 4


class PymisError(Exception):
    """
    Base class of all the program exceptions.

    Arguments:
        message (str): Human readable description.
        stage (str): Pipeline stage that raised the error.
        witness (object): Optional data that shows the failure.

    Public attributes:
        code (str): Machine readable error code.
        exit_code (int): Process exit status for this error.
    """

    code = 'error'
    exit_code = EXIT_STAGE
    default_stage = None

    def __init__(self, message='', stage=None, witness=None):
        super().__init__(message)
        self.message = message
        self.stage = stage or self.default_stage
        self.witness = witness

    def to_dict(self):
        return {
            'code': self.code,
            'stage': self.stage,
            'message': self.message,
        }


class ConfigError(PymisError):
    code = 'config_error'
    exit_code = EXIT_CONFIG
    default_stage = 'config'


class BudgetExceeded(PymisError):
    code = 'budget_exceeded'
    exit_code = EXIT_BUDGET
    default_stage = 'oracle'


class CertificationFailure(PymisError):
    code = 'certification_failure'
    exit_code = EXIT_CERTIFICATION
    default_stage = 'verify'


class MissingArtifact(PymisError):
    code = 'missing_artifact'
    exit_code = EXIT_CONFIG
    default_stage = 'report'


class DegenerateDrawing(PymisError):
    code = 'degenerate_drawing'
    default_stage = 'planarize'


class GadgetOverlap(PymisError):
    code = 'gadget_overlap'
    default_stage = 'planarize'


class ThresholdViolation(PymisError):
    code = 'threshold_violation'
    default_stage = 'reduce'


class SignViolation(PymisError):
    code = 'sign_violation'
    default_stage = 'reduce'


class GaugeViolation(PymisError):
    code = 'gauge_violation'
    default_stage = 'reduce'


class TreeViolation(PymisError):
    code = 'tree_violation'
    default_stage = 'reduce'


class InterClusterSignConflict(GaugeViolation):
    code = 'inter_cluster_sign_conflict'


class EmbeddingOverflow(PymisError):
    code = 'embedding_overflow'
    default_stage = 'embed'


class AlreadyDeleted(PymisError):
    code = 'already_deleted'
    default_stage = 'compile'


class PatternMismatch(PymisError):
    code = 'pattern_mismatch'
    default_stage = 'compile'


class PatchTooLarge(BudgetExceeded):
    code = 'patch_too_large'
    default_stage = 'compile'


class RoutingFailed(PymisError):
    code = 'routing_failed'
    default_stage = 'route'


class ConvergenceFailure(PymisError):
    code = 'convergence_failure'
    default_stage = 'anneal'


class StepTooLarge(PymisError):
    code = 'step_too_large'
    default_stage = 'anneal'
