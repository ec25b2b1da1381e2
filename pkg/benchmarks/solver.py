from hessdir.grid import BoxGrid, GridField
from hessdir.model import make_problem
from hessdir.solver import assemble_linearized, residual, solve


class BenchSolve:
    param_names = ["problem", "m"]
    params = [["zero_A_const_B", "skew_A_const_B", "ot_quadratic"], [17, 33]]

    def setup(self, problem, m):
        self.prob = make_problem(problem, 2, 2, lo=-0.5, hi=0.5)

    def time_solve(self, problem, m):
        solve(self.prob, m, init_mode="harmonic")


class BenchOperator:
    param_names = ["n", "m"]
    params = [[2, 3], [9, 17]]

    def setup(self, n, m):
        self.prob = make_problem("skew_A_const_B", n, 2, lo=-0.5, hi=0.5)
        grid = BoxGrid.for_problem(self.prob, m)
        self.u = GridField.from_function(grid, self.prob.phi)

    def time_residual(self, n, m):
        residual(self.u, self.prob)

    def time_assemble(self, n, m):
        assemble_linearized(self.u, self.prob, "full")
