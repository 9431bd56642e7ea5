# pylint: skip-file
project = "subspace-sparsify Documentation"
root_doc = "index"
