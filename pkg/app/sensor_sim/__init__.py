from app.sensor_sim.hall import simulate_hall
from app.sensor_sim.lidar import simulate_lidar
from app.sensor_sim.odometry import step_odometry
from app.sensor_sim.rgbd import simulate_rgbd

__all__ = ['simulate_hall', 'simulate_lidar', 'step_odometry', 'simulate_rgbd']
