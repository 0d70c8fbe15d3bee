# Cloud I/O package
