from stabgraph.cli import main

raise SystemExit(main())
