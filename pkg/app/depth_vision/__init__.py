from app.depth_vision.classify import classify_from_corners
from app.depth_vision.corners import extract_corners
from app.depth_vision.height import depth_to_height
from app.depth_vision.pipeline import debug_height_image, process_depth_frame
from app.depth_vision.segmentation import segment_height_image, segment_table
from app.depth_vision.servo import in_reach, select_target, servo_error

__all__ = ['classify_from_corners', 'extract_corners', 'depth_to_height', 'debug_height_image',
           'process_depth_frame', 'segment_height_image', 'segment_table', 'in_reach', 'select_target',
           'servo_error']
