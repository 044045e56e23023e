from marl_dyn.conf.defaults import CUSTOM_GAME_NAME, MATRIX_GAME_NAMES
from marl_dyn.conf.run_config import GameSpec
from marl_dyn.management.base import MarlDynCommand
from marl_dyn.utils.commons.file_utils import table_to_csv, write_file
from marl_dyn.utils.exceptions import ConfigurationError
from marl_dyn.utils.game_env import MatrixGame, make_game
from marl_dyn.utils.replicator import ReplicatorState, integrate_euler, integrate_rk4, vector_field

INTEGRATORS = {"rk4": integrate_rk4, "euler": integrate_euler}


class Command(MarlDynCommand):
    help = "Write the replicator vector field of a 2x2 game, optionally with one integrated orbit"

    def add_command_arguments(self, parser):
        parser.add_argument("--game", choices=MATRIX_GAME_NAMES, help="Built-in matrix game")
        parser.add_argument("--resolution", type=int, default=15, help="Grid points per axis")
        parser.add_argument(
            "--initial",
            type=float,
            nargs=2,
            default=(0.7, 0.3),
            metavar=("X", "Y"),
            help="Initial action-0 probabilities of the two agents",
        )
        parser.add_argument("--dt", type=float, default=0.01)
        parser.add_argument("--steps", type=int, default=2000, help="Integration steps")
        parser.add_argument("--method", choices=sorted(INTEGRATORS), default="rk4")
        parser.add_argument("--trajectory", default=None, help="CSV path for the integrated orbit")

    def _game(self, options) -> MatrixGame:
        if options.get("game"):
            return make_game(GameSpec.from_dict(options["game"]))
        if options.get("config"):
            game = make_game(self.load_run_config(options).simulation.game)
            if not isinstance(game, MatrixGame):
                raise ConfigurationError("replicator dynamics need a 2x2 matrix game", key="game")
            return game
        allowed = ", ".join((*MATRIX_GAME_NAMES, CUSTOM_GAME_NAME))
        raise ConfigurationError(f"pass --game or a --config with a matrix game ({allowed})", key="game")

    def run(self, **options):
        game = self._game(options)
        if options["steps"] < 0:
            raise ConfigurationError(f"steps must be >= 0, got {options['steps']}", key="steps")
        out = self.out_path(options, "field.csv")

        grid = vector_field(game, options["resolution"])
        write_file(out, table_to_csv(("x", "y", "dx", "dy"), grid.to_rows()))
        self.success(f"Wrote {len(grid.points)}-point vector field for {game.name} to {out}")

        if options.get("trajectory"):
            initial = ReplicatorState(*options["initial"])
            states = INTEGRATORS[options["method"]](game, initial, options["dt"], options["steps"])
            rows = [(step, state.x, state.y) for step, state in enumerate(states)]
            path = write_file(options["trajectory"], table_to_csv(("step", "x", "y"), rows))
            self.success(f"Wrote {len(rows)}-point {options['method']} orbit to {path}")
