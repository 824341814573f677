# Routes package: one module of click commands per controller
