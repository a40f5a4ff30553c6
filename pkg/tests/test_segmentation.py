import numpy as np
import pytest

from ellipsoidrep import synthetic
from ellipsoidrep.geometry import EllipsoidFeature, EllipsoidFrame
from ellipsoidrep.representation import (
    LOCAL_LAYOUT,
    EllipsoidNode,
    FeatureMap,
    HierarchicalRepresentation,
    RepresentationConfig,
    represent_hierarchical,
)
from ellipsoidrep.segmentation import (
    backproject_labels,
    deepest_mapped_nodes,
    instance_miou,
    max_segmentation_iou,
    point_usage_rate,
)

from oracles import confusion_miou, reference_backproject


def _tiny_rep(point_index_maps, n_points, levels=1):
    """Hand-built representation whose maps carry the given indices."""
    frame = EllipsoidFrame(rotation=np.eye(3), radii=np.ones(3), center=np.zeros(3))
    feature = EllipsoidFeature(rotvec=np.zeros(3), radii=np.ones(3),
                               center=np.zeros(3))
    nodes = [EllipsoidNode(level=0, parent=None,
                           members=np.arange(n_points, dtype=np.int64),
                           frame=frame, feature=feature, map=None)]
    for pim in point_index_maps:
        pim = np.asarray(pim, dtype=np.int64)
        m = pim.shape[0]
        fmap = FeatureMap(m=m, layout=LOCAL_LAYOUT,
                          data=np.zeros((m, m, 3)), point_index=pim)
        nodes.append(EllipsoidNode(level=1, parent=0,
                                   members=np.unique(pim.ravel()),
                                   frame=frame, feature=feature, map=fmap))
    cfg = RepresentationConfig(levels=2, partitions=len(point_index_maps),
                               resolution=point_index_maps[0].shape[0])
    return HierarchicalRepresentation(nodes=nodes, config=cfg, n_points=n_points)


class TestBackprojectRules:
    def test_mean_then_argmax_tie_lowest_class(self):
        # point 0 painted twice, once class 2 and once class 1: tied means,
        # class 1 must win
        pts = np.array([[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]])
        maps = [np.array([[0]]), np.array([[0]])]
        rep = _tiny_rep([np.array([[0]]), np.array([[0]])], 2)
        res = backproject_labels(rep, [np.array([[2]]), np.array([[1]])], pts)
        assert res.labels[0] == 1
        assert res.mapped[0]
        assert not res.mapped[1]
        assert res.labels[1] == 1  # filled from the only mapped point

    def test_majority_wins(self):
        pts = np.zeros((1, 3))
        pim = np.array([[0, 0], [0, 0]])
        rep = _tiny_rep([pim], 1)
        res = backproject_labels(rep, [np.array([[3, 3], [3, 1]])], pts)
        assert res.labels[0] == 3

    def test_unmapped_fill_nearest_tie_lowest_index(self):
        # point 2 sits exactly between mapped points 0 and 1
        pts = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        pim = np.array([[0, 1], [0, 1]])
        rep = _tiny_rep([pim], 3)
        res = backproject_labels(rep, [np.array([[5, 7], [5, 7]])], pts)
        assert res.labels[0] == 5 and res.labels[1] == 7
        assert res.labels[2] == 5  # tie -> lowest point index

    def test_score_maps(self):
        pts = np.zeros((2, 3))
        pts[1, 0] = 1.0
        pim = np.array([[0, 1], [0, 1]])
        rep = _tiny_rep([pim], 2)
        scores = np.array([[[0.2, 0.8, 0.0], [0.5, 0.1, 0.4]],
                           [[0.2, 0.8, 0.0], [0.5, 0.1, 0.4]]])
        res = backproject_labels(rep, [scores], pts)
        assert res.labels[0] == 1
        assert res.labels[1] == 0

    def test_matches_reference_transcription(self, cloud_suite):
        rng = np.random.default_rng(200)
        for name, pts in cloud_suite[:6]:
            rep = represent_hierarchical(pts, RepresentationConfig(
                levels=2, partitions=5, resolution=6))
            nodes = deepest_mapped_nodes(rep)
            n_classes = 4
            hard = [rng.integers(0, n_classes, size=(6, 6)) for _ in nodes]
            got = backproject_labels(rep, hard, pts, n_classes=n_classes)
            want = reference_backproject([nd.map.point_index for nd in nodes],
                                         hard, pts, n_classes)
            assert np.array_equal(got.labels, want), name

            soft = [rng.uniform(size=(6, 6, n_classes)) for _ in nodes]
            got = backproject_labels(rep, soft, pts)
            want = reference_backproject([nd.map.point_index for nd in nodes],
                                         soft, pts, n_classes)
            assert np.array_equal(got.labels, want), name

    def test_validation(self):
        pts = np.zeros((2, 3))
        rep = _tiny_rep([np.array([[0, 1], [0, 1]])], 2)
        with pytest.raises(ValueError, match="pixel label maps"):
            backproject_labels(rep, [], pts)
        with pytest.raises(ValueError, match="shape"):
            backproject_labels(rep, [np.zeros((3, 3), dtype=int)], pts)
        with pytest.raises(ValueError, match="match the represented"):
            backproject_labels(rep, [np.zeros((2, 2), dtype=int)], np.zeros((5, 3)))


class TestUsageRate:
    def test_counts_unique_points(self):
        pim = np.array([[0, 1], [1, 2]])
        rep = _tiny_rep([pim], 5)
        assert point_usage_rate(rep) == pytest.approx(3 / 5)

    def test_full_usage(self):
        # every point of a sparse surface cloud wins at least one anchor
        pts = synthetic.ellipsoid_surface(30, 201, radii=(1.0, 0.7, 0.5))
        rep = represent_hierarchical(pts, RepresentationConfig(
            levels=1, resolution=32))
        assert point_usage_rate(rep) == 1.0


class TestInstanceMiou:
    def test_perfect_prediction(self):
        gt = np.array([0, 0, 1, 2, 2, 1])
        assert instance_miou(gt, gt, [0, 1, 2]) == 1.0

    def test_absent_class_scores_one(self):
        gt = np.array([0, 0, 1, 1])
        pred = np.array([0, 0, 1, 1])
        assert instance_miou(pred, gt, [0, 1, 7]) == 1.0

    def test_disjoint_prediction(self):
        gt = np.array([0, 0, 0, 0])
        pred = np.array([1, 1, 1, 1])
        assert instance_miou(pred, gt, [0, 1]) == 0.0

    def test_frozen_random_case(self):
        # value frozen from an independent confusion-matrix computation
        rng = np.random.default_rng(1234)
        pred = rng.integers(0, 3, 200)
        gt = rng.integers(0, 3, 200)
        want = 0.22894866126258906
        assert instance_miou(pred, gt, [0, 1, 2]) == pytest.approx(want, abs=1e-15)
        assert confusion_miou(pred, gt, [0, 1, 2]) == pytest.approx(want, abs=1e-15)

    def test_matches_confusion_oracle_random(self):
        rng = np.random.default_rng(202)
        for _ in range(10):
            k = int(rng.integers(2, 6))
            pred = rng.integers(0, k, 150)
            gt = rng.integers(0, k, 150)
            classes = list(range(k))
            assert instance_miou(pred, gt, classes) == pytest.approx(
                confusion_miou(pred, gt, classes), abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError, match="lengths"):
            instance_miou(np.zeros(3), np.zeros(4), [0])
        with pytest.raises(ValueError, match="classes"):
            instance_miou(np.zeros(3), np.zeros(3), [])


class TestMaxSegmentationIou:
    def test_full_usage_gives_exactly_one(self):
        pts = synthetic.ellipsoid_surface(60, 201, radii=(1.0, 0.7, 0.5))
        labels = synthetic.height_bands(pts, 4)
        rep = represent_hierarchical(pts, RepresentationConfig(
            levels=1, resolution=32))
        assert point_usage_rate(rep) == 1.0
        assert max_segmentation_iou(rep, pts, labels) == 1.0

    def test_improves_with_resolution(self, labeled_cloud):
        pts, labels = labeled_cloud
        cfg = lambda m: RepresentationConfig(levels=2, partitions=8, resolution=m)
        lo = max_segmentation_iou(represent_hierarchical(pts, cfg(4)), pts, labels)
        hi = max_segmentation_iou(represent_hierarchical(pts, cfg(16)), pts, labels)
        assert hi >= lo

    def test_validation(self, labeled_cloud):
        pts, labels = labeled_cloud
        rep = represent_hierarchical(pts, RepresentationConfig(
            levels=1, resolution=8))
        with pytest.raises(ValueError, match="labels"):
            max_segmentation_iou(rep, pts, labels[:-1])
        with pytest.raises(ValueError, match="non-negative"):
            max_segmentation_iou(rep, pts, labels - 10)
