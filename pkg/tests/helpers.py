from highwaysim.fleet import make_vehicle


def place(highway, profile, vid, x, v=0.0, lane=0, direction=1):
    vehicle = make_vehicle(profile, vid)
    vehicle.lane, vehicle.direction, vehicle.x, vehicle.velocity = lane, direction, x, v
    highway.add_vehicle(vehicle)
    return vehicle
