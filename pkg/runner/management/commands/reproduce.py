from pathlib import Path

from runner.commands import SpinregCommand
from runner.recipes import RECIPES, RecipeContext, get_recipe, reproduce


class Command(SpinregCommand):
    help = 'Write the simulated data behind one figure into <out>/<figure>/.'

    def add_arguments(self, parser):
        parser.add_argument('figure', help=f'one of {", ".join(sorted(RECIPES))}')
        parser.add_argument('--quick', action='store_true', help='few points per sweep')
        self.add_run_arguments(parser)

    def run(self, figure, **options):
        get_recipe(figure)
        run = self.run_config(options)
        ctx = RecipeContext(run.register(), run, Path(run.output_dir) / figure,
                            quick=options.get('quick', False), seed=run.seed or 0)
        for path in reproduce(figure, ctx):
            self.stdout.write(str(path))
