#!/usr/bin/env python3

from orliczlab.orliczlab import main

main()
