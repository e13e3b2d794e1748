from goldilocks_sir.main import main

main()
