# keeps the tests directory on sys.path so `import helpers` works
