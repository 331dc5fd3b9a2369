print("placeholder smoke ok")
