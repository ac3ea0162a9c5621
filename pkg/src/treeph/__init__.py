"""Persistent homology of embedded trees: diagrams, features and cohort statistics."""
from .diagmetrics import MatchingCost, bottleneck, hausdorff, wasserstein
from .diagram import PersistenceDiagram, read_diagram, read_diagrams
from .features import FeatureVector, persistence_vector, residualize, scale_by_length
from .ph0 import VertexFiltration, height_filtration, persistence0
from .ph1 import RipsFiltration, build_rips, persistence1, tree_loops
from .stats import diproperm, heatmap, pca, pearson
from .treeio import EmbeddedTree, PointCloud, parse_tree, subsample, total_length

__version__ = "0.1.0"
