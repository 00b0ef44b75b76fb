"""Regenerates the committed Gmsh fixtures and their manifest.

Requires the `gmsh` Python module. Output is MSH 2.2 ASCII with physical
names inflow/outflow/wall on the channel boundary and fluid/obstacleN on
the surfaces.

    python3 generate.py
"""
import json
import os

import gmsh

HERE = os.path.dirname(os.path.abspath(__file__))


def channel(name, h, with_rect=True, with_disk=True):
    gmsh.initialize()
    gmsh.option.setNumber("General.Terminal", 0)
    gmsh.model.add(name)
    occ = gmsh.model.occ
    box = occ.addRectangle(-2.0, -1.0, 0.0, 4.0, 2.0)
    tools = []
    if with_rect:
        tools.append((2, occ.addRectangle(-1.1, 0.4, 0.0, 0.2, 0.6)))
    if with_disk:
        tools.append((2, occ.addDisk(1.0, 0.5, 0.0, 0.3, 0.3)))
    out, out_map = occ.fragment([(2, box)], tools)
    occ.synchronize()

    # fragment keeps tool surfaces; the box piece minus tools is the fluid
    surfaces = [tag for (dim, tag) in occ.getEntities(2)]
    obstacles = []
    fluid = []
    for s in surfaces:
        x, y, _ = occ.getCenterOfMass(2, s)
        if with_rect and -1.1 < x < -0.9 and 0.4 < y < 1.0 and occ.getMass(2, s) < 0.2:
            obstacles.append((1, s))
        elif with_disk and (x - 1.0) ** 2 + (y - 0.5) ** 2 < 0.01 and occ.getMass(2, s) < 0.3:
            obstacles.append((2 if with_rect else 1, s))
        else:
            fluid.append(s)

    inflow, outflow, wall = [], [], []
    eps = 1e-9
    for (dim, c) in occ.getEntities(1):
        xmin, ymin, _, xmax, ymax, _ = occ.getBoundingBox(1, c)
        if abs(xmin + 2.0) < 1e-6 and abs(xmax + 2.0) < 1e-6:
            inflow.append(c)
        elif abs(xmin - 2.0) < 1e-6 and abs(xmax - 2.0) < 1e-6:
            outflow.append(c)
        elif (abs(ymin - 1.0) < 1e-6 and abs(ymax - 1.0) < 1e-6) or (
            abs(ymin + 1.0) < 1e-6 and abs(ymax + 1.0) < 1e-6
        ):
            wall.append(c)

    gmsh.model.addPhysicalGroup(1, inflow, 1, "inflow")
    gmsh.model.addPhysicalGroup(1, outflow, 2, "outflow")
    gmsh.model.addPhysicalGroup(1, wall, 3, "wall")
    gmsh.model.addPhysicalGroup(2, fluid, 10, "fluid")
    for oid, s in sorted(obstacles):
        gmsh.model.addPhysicalGroup(2, [s], 10 + oid, "obstacle%d" % oid)

    gmsh.option.setNumber("Mesh.MeshSizeMin", h)
    gmsh.option.setNumber("Mesh.MeshSizeMax", h)
    gmsh.option.setNumber("Mesh.Algorithm", 6)
    gmsh.option.setNumber("Mesh.RandomSeed", 1)
    gmsh.model.mesh.generate(2)
    gmsh.option.setNumber("Mesh.MshFileVersion", 2.2)
    gmsh.option.setNumber("Mesh.Binary", 0)
    gmsh.option.setNumber("Mesh.SaveAll", 0)
    path = os.path.join(HERE, name + ".msh")
    gmsh.write(path)
    gmsh.finalize()
    return path


def count(path):
    with open(path) as f:
        lines = f.read().split("\n")
    i = lines.index("$Elements")
    n = int(lines[i + 1])
    tri = lines_ = 0
    for row in lines[i + 2 : i + 2 + n]:
        t = int(row.split()[1])
        if t == 2:
            tri += 1
        elif t == 1:
            lines_ += 1
    j = lines.index("$Nodes")
    return int(lines[j + 1]), tri, lines_


def main():
    specs = [
        # name, h, rect, disk, holes in full mesh, holes in fluid submesh, obstacle ids
        ("paper_channel_h0.05", 0.05, True, True, 0, 1, 2),
        ("paper_channel_h0.2", 0.2, True, True, 0, 1, 2),
        ("disk_channel_h0.25", 0.25, False, True, 0, 1, 1),
    ]
    entries = []
    for name, h, rect, disk, holes, fluid_holes, n_obs in specs:
        path = channel(name, h, rect, disk)
        nodes, tri, lines_ = count(path)
        entries.append(
            {
                "file": os.path.basename(path),
                "h": h,
                "nodes": nodes,
                "triangles": tri,
                "boundary_lines": lines_,
                "holes": holes,
                "fluid_holes": fluid_holes,
                "obstacles": n_obs,
            }
        )
    with open(os.path.join(HERE, "manifest.jsonl"), "w") as f:
        for e in entries:
            f.write(json.dumps(e, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
