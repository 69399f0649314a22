from .tests import test_routes

routes = [
    test_routes,
]
