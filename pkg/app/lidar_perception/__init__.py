from app.lidar_perception.candidates import classify_candidates
from app.lidar_perception.em_fit import em_fit_stack
from app.lidar_perception.iepf import iepf_segments
from app.lidar_perception.pipeline import StackLocator, candidate_table, check_consistency, default_stack_model, \
    em_history_table, scan_candidates
from app.lidar_perception.ransac import ransac_major_axis
from app.lidar_perception.ranges import detection_range, rays_hitting
from app.lidar_perception.slicing import brick_band, slice_cloud
from app.lidar_perception.waypoint import class_waypoint, red_approach_waypoint

__all__ = ['classify_candidates', 'em_fit_stack', 'iepf_segments', 'StackLocator', 'candidate_table',
           'check_consistency', 'default_stack_model', 'em_history_table', 'scan_candidates', 'ransac_major_axis',
           'detection_range', 'rays_hitting', 'brick_band', 'slice_cloud', 'class_waypoint', 'red_approach_waypoint']
