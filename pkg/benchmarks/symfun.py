import numpy as np

from hessdir.symfun import cone_classify, elem_sym, matrix_F_grad, matrix_Sk


class Bench:
    param_names = ["n", "k"]
    params = [[3, 6, 10], [1, 2, 3]]

    def setup(self, n, k):
        rng = np.random.default_rng(0)
        self.lam = rng.normal(size=(10000, n)) + 2.0
        X = rng.normal(size=(2000, n, n))
        self.W = np.eye(n) * (n + 1.0) + 0.3 * (X + np.swapaxes(X, -1, -2))

    def time_elem_sym(self, n, k):
        elem_sym(self.lam, k)

    def time_cone_classify(self, n, k):
        cone_classify(self.lam, k)

    def time_matrix_Sk(self, n, k):
        matrix_Sk(self.W, k)

    def time_matrix_F_grad(self, n, k):
        matrix_F_grad(self.W, k)
