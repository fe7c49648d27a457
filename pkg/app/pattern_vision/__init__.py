from app.pattern_vision.detector import detect_pattern, detect_pattern_segments, overlay_image
from app.pattern_vision.flood_fill import bridging_flood_fill, flood_fill
from app.pattern_vision.lookup import build_lookup, classify_image, classify_pixel, default_calibration

__all__ = ['detect_pattern', 'detect_pattern_segments', 'overlay_image', 'bridging_flood_fill', 'flood_fill',
           'build_lookup', 'classify_image', 'classify_pixel', 'default_calibration']
