#!/usr/bin/env python3
"""Writes the three-scene fixture corpus under fixtures/scenes/.

Scenes are world-frame documents at 2 Hz:
  scene-0001  city, clear: approach a red light, stop for a crossing
              pedestrian, start again on green
  scene-0002  highway, rain: fast cruise with a lane change to the left
  scene-0003  intersection, fog: slow approach and a left turn past a cyclist

Output is a pure function of this file.
"""
import json
import math
import pathlib

DT = 0.5
T0_US = 1_000_000
ROOT = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "scenes"


def rot(yaw):
    c, s = math.cos(yaw), math.sin(yaw)
    return [c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]


def local_to_world(pose, fwd, left):
    x, y, yaw = pose
    return (x + fwd * math.cos(yaw) - left * math.sin(yaw),
            y + fwd * math.sin(yaw) + left * math.cos(yaw))


def rect(pose, f0, f1, l0, l1):
    return [list(local_to_world(pose, f, l)) for f, l in ((f0, l0), (f1, l0), (f1, l1), (f0, l1))]


def integrate(start, speeds, yaw_rates):
    """Ego poses from per-frame speed and yaw rate (forward Euler)."""
    x, y, yaw = start
    poses = []
    for i, (v, w) in enumerate(zip(speeds, yaw_rates)):
        poses.append((x, y, yaw))
        x += v * math.cos(yaw) * DT
        y += v * math.sin(yaw) * DT
        yaw += w * DT
    return poses


def obj(oid, cat, center_xy, size, yaw, vel=(0.0, 0.0), attrs=None, z=0.9):
    o = {
        "object_id": oid,
        "category": cat,
        "center": [round(center_xy[0], 6), round(center_xy[1], 6), z],
        "size": list(size),
        "yaw": round(yaw, 6),
        "velocity": [round(vel[0], 6), round(vel[1], 6)],
    }
    if attrs:
        o["attributes"] = attrs
    return o


def frame(scene_id, i, pose, speed, yaw_rate, objects, lanes, weather, road):
    fid = f"{scene_id}-f{i:03d}"
    return {
        "frame_id": fid,
        "timestamp_us": T0_US + i * 500_000,
        "ego": {
            "position": [pose[0], pose[1], 0.0],
            "rotation": rot(pose[2]),
            "speed": speed,
            "yaw_rate": yaw_rate,
        },
        "objects": objects,
        "lanes": lanes,
        "weather": weather,
        "road_type": road,
        "media_refs": [f"fixture://{scene_id}/{fid}/CAM_FRONT.jpg",
                       f"fixture://{scene_id}/{fid}/CAM_BACK.jpg"],
    }


def scene_city():
    sid = "scene-0001"
    n = 20
    speeds = []
    for i in range(n):
        if i <= 5:
            v = 6.0
        elif i <= 10:
            v = 6.0 * (10 - i) / 5.0
        elif i <= 13:
            v = 0.0
        else:
            v = min(5.0, 1.25 * (i - 13))
        speeds.append(v)
    origin = (100.0, 50.0, 0.3)
    poses = integrate(origin, speeds, [0.0] * n)
    road = (origin[0], origin[1], origin[2])
    drivable = [rect(road, -20.0, 140.0, -5.5, 5.5)]
    light = local_to_world(road, 33.0, -4.5)
    sign = local_to_world(road, 12.0, -6.5)
    parked = local_to_world(road, 16.0, -3.0)
    frames = []
    for i, pose in enumerate(poses):
        t = i * DT
        objs = [
            obj("tl-1", "traffic_light", light, (0.5, 0.5, 1.2), origin[2],
                attrs={"color": "red" if i <= 13 else "green"}, z=4.0),
            obj("sign-1", "traffic_sign", sign, (0.2, 0.8, 0.8), origin[2], z=2.5),
            obj("veh-1", "vehicle", parked, (4.5, 1.9, 1.6), origin[2]),
        ]
        # oncoming vehicle in the opposite lane
        onc = local_to_world(road, 90.0 - 8.0 * t, 3.5)
        objs.append(obj("veh-2", "vehicle", onc, (4.6, 1.9, 1.5), origin[2] + math.pi,
                        vel=(-8.0 * math.cos(origin[2]), -8.0 * math.sin(origin[2]))))
        if 6 <= i <= 16:
            lat = -6.0 + 1.2 * (t - 3.0)
            ped = local_to_world(road, 30.0, lat)
            objs.append(obj("ped-1", "pedestrian", ped, (0.6, 0.6, 1.7), origin[2] + math.pi / 2,
                            vel=(-1.2 * math.sin(origin[2]), 1.2 * math.cos(origin[2]))))
        lanes = {"same_direction": 1, "opposite_direction": 1, "drivable_polygons": drivable,
                 "lane_width": 3.5}
        yaw_rate = 0.0
        frames.append(frame(sid, i, pose, speeds[i], yaw_rate, objs, lanes, "clear", "city"))
    return {"scene_id": sid, "coordinate_frame": "world", "location": "fixture-city", "frames": frames}


def scene_highway():
    sid = "scene-0002"
    n = 20
    origin = (-400.0, 1200.0, -1.1)
    speeds = [22.0 + 0.15 * i for i in range(n)]
    # lateral offset: smooth step of one lane over frames 6..10
    def lateral(t):
        a, b = 3.0, 5.0
        if t <= a:
            return 0.0
        if t >= b:
            return 3.5
        u = (t - a) / (b - a)
        return 3.5 * (3 * u * u - 2 * u * u * u)

    along = [0.0]
    for i in range(1, n):
        along.append(along[-1] + 0.5 * (speeds[i - 1] + speeds[i]) * DT)
    poses = []
    yaw_rates = []
    for i in range(n):
        t = i * DT
        eps = 1e-3
        dlat = (lateral(t + eps) - lateral(t - eps)) / (2 * eps)
        heading = math.atan2(dlat, speeds[i])
        px, py = local_to_world(origin, along[i], lateral(t))
        poses.append((px, py, origin[2] + heading))
    for i in range(n):
        nxt = poses[min(i + 1, n - 1)][2]
        prv = poses[max(i - 1, 0)][2]
        span = (min(i + 1, n - 1) - max(i - 1, 0)) * DT
        yaw_rates.append((nxt - prv) / span)
    drivable = [rect(origin, -50.0, 700.0, -1.75 - 3.5, 1.75 + 7.0)]
    frames = []
    for i, pose in enumerate(poses):
        t = i * DT
        objs = []
        lead = local_to_world(origin, along[i] + 45.0 - 2.0 * t, 0.0)
        objs.append(obj("veh-10", "vehicle", lead, (4.7, 1.9, 1.5), origin[2],
                        vel=(20.0 * math.cos(origin[2]), 20.0 * math.sin(origin[2]))))
        truck = local_to_world(origin, 30.0 + 18.0 * t, -3.5)
        objs.append(obj("veh-11", "vehicle", truck, (12.0, 2.5, 3.8), origin[2],
                        vel=(18.0 * math.cos(origin[2]), 18.0 * math.sin(origin[2])), z=1.9))
        behind = local_to_world(origin, along[i] - 25.0 + 1.0 * t, 3.5)
        objs.append(obj("veh-12", "vehicle", behind, (4.4, 1.8, 1.5), origin[2],
                        vel=(24.0 * math.cos(origin[2]), 24.0 * math.sin(origin[2]))))
        lanes = {"same_direction": 3, "opposite_direction": 0, "drivable_polygons": drivable,
                 "lane_width": 3.5}
        frames.append(frame(sid, i, pose, speeds[i], yaw_rates[i], objs, lanes, "rain", "highway"))
    return {"scene_id": sid, "coordinate_frame": "world", "frames": frames}


def scene_intersection():
    sid = "scene-0003"
    n = 20
    origin = (20.0, -35.0, 1.4)
    speeds = []
    yaw_rates = []
    for i in range(n):
        if i < 8:
            v = 8.0 - 0.5 * i
        else:
            v = 4.5
        speeds.append(v)
        # quarter turn to the left over frames 8..13 (3 s)
        yaw_rates.append((math.pi / 2) / 3.0 if 8 <= i < 14 else 0.0)
    poses = integrate(origin, speeds, yaw_rates)
    approach = rect(origin, -20.0, 60.0, -7.0, 7.0)
    corner = poses[11]
    exit_pose = (poses[14][0], poses[14][1], origin[2] + math.pi / 2)
    exit_road = rect(exit_pose, -25.0, 80.0, -7.0, 7.0)
    light = local_to_world(origin, 45.0, 8.0)
    frames = []
    for i, pose in enumerate(poses):
        t = i * DT
        cyc = local_to_world(origin, 52.0, 10.0 - 3.0 * t)
        objs = [
            obj("tl-3", "traffic_light", light, (0.5, 0.5, 1.2), origin[2] - math.pi / 2,
                attrs={"state": "green"}, z=4.5),
            obj("cyc-1", "cyclist", cyc, (1.8, 0.6, 1.7), origin[2] - math.pi / 2,
                vel=(3.0 * math.sin(origin[2]), -3.0 * math.cos(origin[2]))),
            obj("ped-3", "pedestrian", local_to_world(origin, 20.0 + 0.8 * t, -8.5),
                (0.6, 0.6, 1.7), origin[2], vel=(0.8 * math.cos(origin[2]), 0.8 * math.sin(origin[2]))),
            obj("cone-1", "other", local_to_world(corner, 6.0, -6.5), (0.4, 0.4, 0.7), 0.0, z=0.35),
        ]
        if i >= 4:
            objs.append(obj("veh-30", "vehicle", local_to_world(origin, 70.0 - 6.0 * (t - 2.0), 3.5),
                            (4.5, 1.9, 1.5), origin[2] + math.pi,
                            vel=(-6.0 * math.cos(origin[2]), -6.0 * math.sin(origin[2]))))
        cross = [
            {"direction": "left_to_right",
             "polyline": [list(local_to_world(origin, 48.0, 15.0)), list(local_to_world(origin, 48.0, -15.0))]},
            {"direction": "right_to_left",
             "polyline": [list(local_to_world(origin, 52.0, -15.0)), list(local_to_world(origin, 52.0, 15.0))]},
        ] if i < 14 else []
        lanes = {"same_direction": 2, "opposite_direction": 2, "cross_lanes": cross,
                 "drivable_polygons": [approach, exit_road], "lane_width": 3.5}
        frames.append(frame(sid, i, pose, speeds[i], yaw_rates[i], objs, lanes, "fog", "intersection"))
    return {"scene_id": sid, "coordinate_frame": "world", "frames": frames}


def main():
    ROOT.mkdir(parents=True, exist_ok=True)
    for doc in (scene_city(), scene_highway(), scene_intersection()):
        path = ROOT / f"{doc['scene_id']}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n")
        print(path)


if __name__ == "__main__":
    main()
