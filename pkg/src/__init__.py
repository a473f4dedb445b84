# Lola stream runtime verification monitor
