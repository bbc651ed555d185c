
class QsEigError(Exception):
    """Base de toutes les erreurs du solveur, porte le code de sortie CLI."""
    exit_code = 1

    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


class FileNotExisted(QsEigError):

    def __init__(self, path):
        self.path = path
        self.msg = path

    def __str__(self):
        return f'Le fichier {self.path} n\'existe pas.'


class InvalidConfig(QsEigError):

    def __str__(self):
        return f'Configuration invalide: {self.msg}'


class InvalidParams(QsEigError):

    def __str__(self):
        return f'Paramètres invalides: {self.msg}'


class GridTooSmall(QsEigError):

    def __str__(self):
        return f'Grille trop petite: {self.msg}'


class SingularPotential(QsEigError):

    def __str__(self):
        return f'Potentiel singulier: {self.msg}'


class DimensionMismatch(QsEigError):

    def __str__(self):
        return f'Dimensions incompatibles: {self.msg}'


class NonFinite(QsEigError):

    def __str__(self):
        return f'Valeurs non finies: {self.msg}'


class NoConvergence(QsEigError):
    exit_code = 5

    def __str__(self):
        return f'Pas de convergence: {self.msg}'


class NotPositiveDefinite(QsEigError):

    def __init__(self, msg, hint=None):
        self.msg = msg
        self.hint = hint

    def __str__(self):
        if self.hint:
            return f'Matrice non définie positive: {self.msg} ({self.hint})'
        return f'Matrice non définie positive: {self.msg}'


class RankDeficient(QsEigError):

    def __str__(self):
        return f'Bloc de rang déficient: {self.msg}'


class SmallSolveSingular(QsEigError):

    def __str__(self):
        return f'Système réduit singulier: {self.msg}'


class MissingLambda1(QsEigError):

    def __str__(self):
        return f'lambda1 non estimé: {self.msg}'


class GapTooSmall(QsEigError):

    def __str__(self):
        return f'Écart spectral trop petit: {self.msg}'


class BracketNotSPD(QsEigError):

    def __str__(self):
        return f'Crochet de la solution exacte non défini positif: {self.msg}'


class ZeroReference(QsEigError):

    def __str__(self):
        return f'Référence nulle: {self.msg}'


class InsufficientData(QsEigError):

    def __str__(self):
        return f'Données insuffisantes: {self.msg}'


class StepSizeRejected(QsEigError):

    def __str__(self):
        return f'Pas de temps rejeté: {self.msg}'
