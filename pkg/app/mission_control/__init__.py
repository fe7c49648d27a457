from app.mission_control.assist import AssistChannel, emulated_assist, ingest_assist, simulated_assist
from app.mission_control.exploration import coverage_waypoints, set_priority_areas, spiral_points
from app.mission_control.grasp import GraspMemory, grasp_cycle
from app.mission_control.inventory import next_reachable, plan_loading, replan_on_failure
from app.mission_control.mission import Mission, run_mission, spiral_search

__all__ = ['AssistChannel', 'emulated_assist', 'ingest_assist', 'simulated_assist', 'coverage_waypoints',
           'set_priority_areas', 'spiral_points', 'GraspMemory', 'grasp_cycle', 'next_reachable', 'plan_loading',
           'replan_on_failure', 'Mission', 'run_mission', 'spiral_search']
