from app.arena_model.generator import generate_arena
from app.arena_model.pattern import pattern_cells
from app.arena_model.pile import default_stack_layout, stack_offsets, wall_layer_recipe

__all__ = ['generate_arena', 'pattern_cells', 'default_stack_layout', 'stack_offsets', 'wall_layer_recipe']
