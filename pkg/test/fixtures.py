CYLINDER = [{'kind': 'line'}, {'kind': 'circle'}]

COARSE = {'counts': [9, 4]}

RUN_CONFIG = {
    'manifold': CYLINDER,
    'functions': {
        'cube': 'h1^3',
        'square': 'h1^2',
        'parabola': 'x^2',
        'cubic': 'x^3',
    },
    'bifunctions': {
        'shifted': 'u - v + 1',
    },
    'regions': {
        'upper': [{'lower': 0, 'upper': 3}, {}],
        'segment': [{'lower': -2, 'upper': -1}, {}],
        'unit': [{'lower': -1, 'upper': 1}, {}],
    },
    'seed': 7,
    'checks': [
        {'name': 'cube-upper', 'kind': 'geodesic_phi_convex', 'expect': 'pass',
         'args': {'function': 'cube', 'phi': 'diff', 'region': 'upper'}, 'sampling': COARSE},
        {'name': 'cube-segment', 'kind': 'geodesic_phi_convex', 'expect': 'violated',
         'args': {'function': 'cube', 'phi': 'diff', 'region': 'segment'}, 'sampling': COARSE},
        {'name': 'parabola-three-point', 'kind': 'three_point', 'expect': 'pass',
         'args': {'function': 'parabola', 'phi': 'diff', 'x': 0, 'y': 1, 'z': 2}},
        {'name': 'cubic-interval', 'kind': 'phi_convex_interval', 'expect': 'violated',
         'args': {'function': 'cubic', 'phi': 'diff', 'interval': [-2, 0]}},
    ],
}

# Expectations which the run cannot meet
MISMATCH_CONFIG = {
    **RUN_CONFIG,
    'checks': [
        {'name': 'cube-upper', 'kind': 'geodesic_phi_convex', 'expect': 'violated',
         'args': {'function': 'cube', 'phi': 'diff', 'region': 'upper'}, 'sampling': COARSE},
    ],
}

USER_CONFIG = '''
[tolerance]
closed-form = 1e-7
fd-step = 1e-4

[sampling]
line-count = 21
t-count = 9

[run]
threads = 2
'''
