# Tests package for canonical-snl
