"""Constantes numériques partagées."""
# Tolérance relative par défaut des solveurs internes de G
INNER_TOL_DEFAULT = 1e-12

# Borne supérieure admise pour la tolérance du gradient conjugué
CG_TOL_MAX = 1e-4

# Tolérance d'arrêt du gradient de Grassmann
GRAD_EPS_DEFAULT = 1e-5

# Au-delà de ce nombre de degrés de liberté, G passe au gradient conjugué
DIRECT_SOLVER_MAX_DOFS = 200000

# Taille maximale des chemins denses (solution exacte, vérifications)
DENSE_MAX_DOFS = 200

# Distance minimale à l'origine pour le potentiel coulombien non lissé
COULOMB_ORIGIN_RADIUS = 1e-12

# Seuil relatif de rang pour les matrices de Gram
RANK_RTOL = 1e-12

# Seuil relatif de définie positivité pour inv_sqrt
SPD_RTOL = 1e-14

# Nombre de tirages aléatoires avant RankDeficient
INIT_MAX_DRAWS = 3

# Détection de divergence : hausses d'énergie consécutives tolérées
DIVERGENCE_STREAK = 3
DIVERGENCE_RTOL = 1e-8

# Stagnation du gradient : fenêtre de pas, gain relatif minimal, plancher d'arrondi du gradient du sous-espace
STALL_WINDOW = 50
STALL_RTOL = 1e-3
STALL_GRAD_FLOOR = 1e-11

# Plancher d'arrondi pour l'ajustement des taux exponentiels
RATE_FLOOR = 1e-13
RATE_MIN_POINTS = 5
RATE_WINDOW_DEFAULT = 0.7

# Exigence du balayage en tau : max_tau err_i <= facteur * min_tau err_i
SWEEP_TAU_FACTOR = 10.0
SWEEP_ERR_FLOOR = 1e-12

# Fichier d'état
STATE_MAGIC = b'QSEV1'

# En-tête du CSV d'historique
HISTORY_CSV_HEADER = ['step', 'energy', 'orth_error', 'grad_norm_l2', 'grad_norm_a', 'err_u',
                      'lambda_min_gram', 'green_solves']


class EXIT_CODE:
    OK = 0
    CONFIG_ERROR = 1
    MAX_STEPS = 2
    DIVERGED = 3
    INVARIANT_FAILED = 4
    REFERENCE_FAILED = 5

# Mémoire maximale consacrée aux états conservés pour err_u ; au-delà, fichier temporaire
HISTORY_STATE_BUDGET_BYTES = 512 * 2 ** 20

# Vérification : nombre de pas, de tirages et de pas échantillonnés, marge sur tau
VERIFY_MAX_STEPS = 200
VERIFY_SAMPLES = 200
VERIFY_SAMPLED_STEPS = 20
VERIFY_TAU_FACTOR = 0.9

# Run de vérification mené à convergence : tolérance plafonnée, budget de pas ; run court de déterminisme
VERIFY_CONVERGENCE_EPS = 1e-10
VERIFY_CONVERGENCE_STEPS = 5000
VERIFY_DETERMINISM_STEPS = 20
