# meanscale: maximal windowed means across scales
