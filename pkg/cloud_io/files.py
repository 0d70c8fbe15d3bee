"""
Point-Cloud Files
ASCII XYZ and ASCII PLY (via plyfile) reading and atomic writing
"""
from dataclasses import dataclass
from enum import Enum
import logging
import math
import os
import tempfile

import numpy as np
from plyfile import PlyData, PlyElement, PlyParseError

from geometry.cloud import PointCloud
from geometry.errors import CloudFormatError

logger = logging.getLogger(__name__)


class CloudFormat(str, Enum):
    XYZ = 'xyz'
    PLY = 'ply'


@dataclass(frozen=True)
class CloudFile:
    """A cloud file path and its format"""
    path: str
    format: CloudFormat = CloudFormat.XYZ

    @classmethod
    def from_path(cls, path: str) -> 'CloudFile':
        """Pick the format from the file extension (.ply, anything else XYZ)"""
        ext = os.path.splitext(str(path))[1].lower()
        return cls(str(path), CloudFormat.PLY if ext == '.ply' else CloudFormat.XYZ)


def _as_cloud_file(file) -> CloudFile:
    return file if isinstance(file, CloudFile) else CloudFile.from_path(file)


def format_coordinate(value: float) -> str:
    """Shortest decimal text that reads back to the same float"""
    text = repr(float(value))
    return text[:-2] if text.endswith('.0') else text


def _parse_xyz(fields, number: int) -> list:
    try:
        values = [float(v) for v in fields[:3]]
    except ValueError:
        raise CloudFormatError(f"invalid number in {' '.join(fields)!r}", line=number)
    if not all(math.isfinite(v) for v in values):
        raise CloudFormatError("non-finite coordinate", line=number)
    return values


def _read_xyz(path: str) -> PointCloud:
    rows = []
    extra_columns = False
    with open(path, 'r') as handle:
        for number, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields or fields[0].startswith('#'):
                continue
            if len(fields) < 3:
                raise CloudFormatError(f"expected 3 coordinates, found {len(fields)}", line=number)
            extra_columns = extra_columns or len(fields) > 3
            rows.append(_parse_xyz(fields, number))

    if not rows:
        raise CloudFormatError("empty file")
    if extra_columns:
        logger.warning("Discarded columns beyond x y z (normals/colors) in %s", path)
    return PointCloud(np.array(rows, dtype=np.float64))


def _read_ply(path: str) -> PointCloud:
    if os.path.getsize(path) == 0:
        raise CloudFormatError("empty file")
    try:
        ply = PlyData.read(path)
    except (PlyParseError, ValueError, IndexError) as e:
        raise CloudFormatError(f"malformed PLY: {e}")

    if not ply.text:
        raise CloudFormatError("only ASCII PLY is supported")
    if 'vertex' not in ply:
        raise CloudFormatError("no vertex element")
    vertex = ply['vertex']
    names = vertex.data.dtype.names
    if not all(axis in names for axis in ('x', 'y', 'z')):
        raise CloudFormatError("vertex element lacks x, y, z properties")
    if len(names) > 3:
        logger.warning("Discarded vertex properties %s in %s",
                       [p for p in names if p not in ('x', 'y', 'z')], path)

    points = np.column_stack([vertex['x'], vertex['y'], vertex['z']]).astype(np.float64)
    if len(points) == 0:
        raise CloudFormatError("empty file")
    if not np.all(np.isfinite(points)):
        raise CloudFormatError("non-finite coordinate")
    return PointCloud(points)


def read_cloud(file) -> PointCloud:
    """
    Read a cloud from an XYZ or ASCII PLY file

    Args:
        file: CloudFile or path (format picked from the extension)

    Returns:
        PointCloud: Points in file order
    """
    file = _as_cloud_file(file)
    if file.format == CloudFormat.PLY:
        return _read_ply(file.path)
    return _read_xyz(file.path)


def _write_xyz(cloud: PointCloud, handle) -> None:
    text = ''.join(' '.join(format_coordinate(v) for v in point) + '\n' for point in cloud.points)
    handle.write(text.encode('ascii'))


def _write_ply(cloud: PointCloud, handle) -> None:
    vertices = np.empty(len(cloud), dtype=[('x', 'f8'), ('y', 'f8'), ('z', 'f8')])
    for column, axis in enumerate('xyz'):
        vertices[axis] = cloud.points[:, column]
    PlyData([PlyElement.describe(vertices, 'vertex')], text=True).write(handle)


WRITERS = {
    CloudFormat.XYZ: _write_xyz,
    CloudFormat.PLY: _write_ply,
}


def write_cloud(cloud: PointCloud, file) -> None:
    """
    Write a cloud atomically (temporary file, then rename)

    Args:
        cloud: Cloud to write
        file: CloudFile or path (format picked from the extension)
    """
    file = _as_cloud_file(file)
    directory = os.path.dirname(os.path.abspath(file.path))

    fd, temp_path = tempfile.mkstemp(dir=directory, prefix='.nlpf-', suffix='.tmp')
    try:
        with os.fdopen(fd, 'wb') as handle:
            WRITERS[file.format](cloud, handle)
        os.replace(temp_path, file.path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise
    logger.debug("Wrote %d points to %s", len(cloud), file.path)
