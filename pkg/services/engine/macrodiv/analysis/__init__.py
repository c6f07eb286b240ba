# Analytic CDFs and SER asymptotics
