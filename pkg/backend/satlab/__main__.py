# backend/satlab/__main__.py

from satlab.cli.main import main

main()
